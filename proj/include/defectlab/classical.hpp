// classical.hpp — Finite atomic model: substochastic coefficient matrices
// over exact rationals, the digraph stabilization criterion, rank-function
// and lattice certificates, and the quantum-to-classical expectation bridge.
//
// Convention: column j of `coeffs` gives the image of the j-th atom,
// P(z_j) = Σ_i p_ij z_i, so coefficient vectors transform as a -> M a.
// Subunitality P(1) <= 1 reads off the rows: (P 1)_i = Σ_j p_ij <= 1.

#pragma once

#include "defectlab/channel.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <vector>

namespace defectlab {

using Rational = boost::multiprecision::cpp_rational;

class EmptySupport : public std::invalid_argument {
public:
    explicit EmptySupport(const std::string& what) : std::invalid_argument(what) {}
};

class WeightBelowThreshold : public std::runtime_error {
public:
    explicit WeightBelowThreshold(const std::string& what) : std::runtime_error(what) {}
};

class AtomsNotPartition : public std::invalid_argument {
public:
    explicit AtomsNotPartition(const std::string& what) : std::invalid_argument(what) {}
};

struct SubMarkovSystem {
    int atoms = 0;
    std::vector<Rational> weights;                 // w_j > 0
    std::vector<std::vector<Rational>> coeffs;     // row i, column j = p_ij >= 0
};

// Nonnegative entries, positive weights, row sums <= 1.
void validate_system(const SubMarkovSystem& sys);

// Parse/print canonical "num/den" strings (integers allowed on input).
Rational rational_from_string(const std::string& text);
std::string rational_to_string(const Rational& r);

struct DigraphResult {
    bool finite = false;
    int height = 0;          // longest path (edge count) starting in the support
    std::vector<int> cycle;  // witnessing cycle when !finite
};

// Edges j -> i iff p_ij > 0, restricted to vertices reachable from the
// support. Finite height predicts stabilization no later than height + 1.
DigraphResult digraph_height(const SubMarkovSystem& sys, const std::vector<int>& support);

struct ClassicalOrbit {
    std::vector<std::vector<Rational>> orbit;  // a_0 = defect, a_{k+1} = M a_k
    bool stabilized = false;
    int index = 0;                 // first n >= 1 with orbit[n] exactly zero
    std::vector<int> cycle_witness;  // reachable cycle when !stabilized
};

// Exact iteration. Non-stabilization is decided combinatorially: supports
// evolve by reachability, so a repeating nonempty support set certifies that
// the orbit never vanishes.
ClassicalOrbit classical_orbit(const SubMarkovSystem& sys, const std::vector<Rational>& defect,
                               int max_iter = 0);

// The defect of the system itself: d_i = 1 - Σ_j p_ij.
std::vector<Rational> system_defect(const SubMarkovSystem& sys);

struct RankFunctionVerdict {
    bool holds = false;
    std::optional<std::pair<int, int>> offending_edge;  // (j, i) with r(i) >= r(j)
    int bound = 0;          // h + 1 where h = max rank value
    bool orbit_confirms = false;   // exact orbit stabilizes within the bound
    bool filtration_exact = false; // induced chain satisfies P(p_k) <= p_{k-1} exactly
};

// Holds iff every edge j -> i strictly decreases the rank. The induced
// filtration p_k = 1_{r <= k-1} is cross-checked exactly.
RankFunctionVerdict rank_function_verify(const SubMarkovSystem& sys, const std::vector<int>& rank,
                                         const std::vector<Rational>& defect);

struct BoundedDenomVerdict {
    bool hypothesis_holds = false;  // system and defect lie in the 1/N lattice
    bool orbit_in_lattice = false;
    std::optional<std::pair<int, int>> first_violation;  // (step, atom)
};

// Checks membership of the system, the defect, and the exact orbit up to
// k_max in {0, 1/N, ..., 1}.
BoundedDenomVerdict bounded_denominator_propagation(const SubMarkovSystem& sys,
                                                    const std::vector<Rational>& defect,
                                                    unsigned N, int k_max);

struct GapBoundResult {
    Rational gap;                        // delta0 / N
    std::vector<Rational> trace_values;  // tau_k = Σ_j a_{k,j} w_j
    bool gap_holds = false;              // each value 0 or >= gap
    std::optional<Rational> contraction; // max tau_{k+1}/tau_k over nonzero steps, when < 1
    std::optional<int> predicted_bound;  // discrete-contraction step bound
    bool bound_confirmed = false;        // stabilization step <= predicted bound
};

// Requires reachable weights >= delta0 (throws WeightBelowThreshold) and
// expects the bounded-denominator hypothesis to hold for the gap claim.
GapBoundResult gap_bound(const SubMarkovSystem& sys, const std::vector<Rational>& defect,
                         unsigned N, const Rational& delta0);

struct ExpectationResult {
    std::vector<std::vector<double>> coefficients;  // p_ij = tr(z_i T(z_j)) / tr(z_i)
    bool diagonal_preserved = false;  // every T(z_j) diagonal in the atom basis
    std::optional<SubMarkovSystem> snapped;  // rationals within 1e-9, row sums <= 1
};

// Atom basis given as an orthonormal dim x dim matrix whose columns are the
// atoms. Throws AtomsNotPartition otherwise.
ExpectationResult expectation_coefficients(const KrausMap& t, const Matrix& atom_basis,
                                           const Tolerances& tol = {});

}  // namespace defectlab
