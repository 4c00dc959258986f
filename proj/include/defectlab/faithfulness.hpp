// faithfulness.hpp — The hierarchy of unitality conditions: persistence
// evidence, corner-faithfulness, common invariant functionals, subharmonic
// projection analysis and corner irreducibility.

#pragma once

#include "defectlab/stabilization.hpp"

#include <optional>
#include <string>
#include <vector>

namespace defectlab {

class OmegaNotFaithful : public std::invalid_argument {
public:
    explicit OmegaNotFaithful(const std::string& what) : std::invalid_argument(what) {}
};

class HypothesesNotMet : public std::runtime_error {
public:
    explicit HypothesesNotMet(const std::string& what) : std::runtime_error(what) {}
};

struct PersistenceEvidence {
    bool has_invertible_kraus = false;
    int kraus_span_dim = 0;  // rank of the vectorized Kraus family
};

struct UnitalityReport {
    bool is_unital = false;
    bool stabilized = false;
    bool corner_faithful = false;
    int common_kernel_dim_on_q = 0;
    PersistenceEvidence persistence;
    // corner_faithful ∧ stabilized ⇒ is_unital; false only on a tolerance bug.
    bool verdict_consistent = true;
};

struct CornerFaithfulness {
    bool faithful = false;
    int common_kernel_dim = 0;  // dim( range(Q) ∩ ∩_i ker V_i† )
};

// dim of the common kernel of {V_i†} restricted to range(Q); faithful iff 0.
CornerFaithfulness corner_faithful(const KrausMap& t, const Matrix& q,
                                   const Tolerances& tol = {});

// Sufficient-condition evidence only; never claims non-persistence.
PersistenceEvidence persistence_certificates(const KrausMap& t, const Tolerances& tol = {});

UnitalityReport unitality_verdict(const KrausMap& t, const Tolerances& tol = {});

struct InvariantFunctionalVerdict {
    bool all_invariant = false;
    std::vector<double> residuals;   // |tr(omega T(I)) - tr(omega)| per map
    bool all_unital = false;         // verified when all_invariant
};

// Checks tr(omega T(I)) = tr(omega) for every map; when all pass, verifies
// that every map is unital. omega must be strictly positive (faithful).
InvariantFunctionalVerdict common_invariant_functional(const std::vector<KrausMap>& family,
                                                       const Matrix& omega,
                                                       const Tolerances& tol = {});

struct SubharmonicReport {
    bool nilpotent_excludes_all = false;  // T^m kills an operator basis
    int nilpotent_power = 0;              // the m used for the exclusion route
    int tested_projections = 0;
    std::optional<Matrix> found_subharmonic;  // p with T(p) >= p when found
};

// Nilpotent route proves no nonzero projection satisfies T(p) >= p; otherwise
// a heuristic search over spectral projections of fixed-point candidates.
SubharmonicReport subharmonic_analysis(const KrausMap& t, const Tolerances& tol = {});

struct CornerIrreducibleVerdict {
    bool unital = false;
    bool inconclusive = false;  // no faithful invariant functional found
    double fixed_point_eigenvalue = 0.0;
    double invariance_residual = 0.0;
};

// For a map whose unit orbit stabilizes at a full-rank effect: extracts an
// invariant functional from the predual spectrum near eigenvalue 1 and, when
// it is faithful, confirms unitality. Throws HypothesesNotMet when the unit
// orbit does not stabilize or stabilizes at a rank-deficient effect.
CornerIrreducibleVerdict corner_irreducible_unitality(const KrausMap& alpha,
                                                      const Tolerances& tol = {});

}  // namespace defectlab
