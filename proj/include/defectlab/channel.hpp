// channel.hpp — Positive/CP subunital maps in Kraus form (Heisenberg picture),
// defect algebra, sequential and parallel composition, and map generators.

#pragma once

#include "defectlab/matcore.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace defectlab {

class NotSubunital : public std::runtime_error {
public:
    explicit NotSubunital(const std::string& what) : std::runtime_error(what) {}
};

class InvalidDescriptor : public std::invalid_argument {
public:
    explicit InvalidDescriptor(const std::string& what) : std::invalid_argument(what) {}
};

// A map X -> Σ_i V_i† X V_i acting on effects.
struct KrausMap {
    int dim = 0;
    std::vector<Matrix> kraus;
    std::string label;
};

// d(T) = I - T(I) and s(T) = T(I), stored so defect + success = I exactly.
struct DefectData {
    Matrix defect;
    Matrix success;
};

// Σ_i V_i† X V_i with Hermitian symmetrization of the output.
Matrix apply_map(const KrausMap& t, const Matrix& x);

// T^k(X) by functional iteration (never materializes Kraus words).
Matrix apply_power(const KrausMap& t, Matrix x, int k);

// Throws NotSubunital when T(I) <= I fails at psd_tol.
DefectData defect(const KrausMap& t, double psd_tol = Tolerances{}.psd);

bool is_subunital(const KrausMap& t, double psd_tol = Tolerances{}.psd);

// X -> T(S(X)); Kraus family is all products V_j^{(S)} V_i^{(T)}.
KrausMap compose(const KrausMap& t, const KrausMap& s);

// Parallel composition with Kraus family {V_i ⊗ W_j}.
KrausMap tensor_map(const KrausMap& t, const KrausMap& s);

KrausMap identity_channel(int dim);

// Kraus operators |i><i+1|, i = 1..d-1; defect is the first basis projector.
KrausMap shift_channel(int d);

// Two-Kraus map on C² with V_1 = |0><0|, V_2 = √c |1><1|; T^k(I) = diag(1, c^k).
KrausMap dephasing_decay(double c);

// Instrument X -> Σ_a E_a^{1/2} X E_a^{1/2} for effects with Σ E_a <= I.
KrausMap povm_instrument(const std::vector<Matrix>& effects, double psd_tol = Tolerances{}.psd);

// The qubit pair E_1 = ½|0><0|, E_2 = ⅔|+><+| (noncommuting, subunital).
KrausMap qubit_noncommuting_povm();

// Subunital CP map whose Kraus family is strictly level-lowering for a hidden
// random flag, direct-summed with a unital block and conjugated by a random
// unitary. Always stabilizes in at most dim steps.
KrausMap random_flag_nilpotent(int dim, std::uint64_t seed);

// Gaussian Kraus family rescaled by 1/sqrt(lambda_max(Σ V_i† V_i) * 1.05).
KrausMap random_subunital(int dim, std::uint64_t seed, int n_kraus = 0);

// Random instrument with jointly diagonalizable effects.
KrausMap random_commuting_instrument(int dim, std::uint64_t seed);

// Random unital channel (Kraus family satisfying Σ V_i† V_i = I exactly up to
// the solver's accuracy, built from a fixed-point normalization).
KrausMap random_unital(int dim, std::uint64_t seed, int n_kraus = 0);

// Descriptor grammar: name[:param[,param]] — e.g. shift:4, dephasing:0.5,
// qubitpovm, randflag:5,seed=9, randsub:4,seed=7, commuting:3,seed=2,
// randunital:3,seed=5, identity:4. `seed` falls back to default_seed.
KrausMap generate(const std::string& descriptor, std::uint64_t default_seed = 0);

}  // namespace defectlab
