// certificates.hpp — Checkable sufficient conditions for finite stabilization:
// projection filtrations, Kraus level lowering, chain criteria, Lyapunov
// witnesses and scalar discreteness/contraction bounds.

#pragma once

#include "defectlab/stabilization.hpp"

#include <optional>
#include <string>
#include <vector>

namespace defectlab {

class MalformedCertificate : public std::invalid_argument {
public:
    explicit MalformedCertificate(const std::string& what) : std::invalid_argument(what) {}
};

class SigmaNotPositive : public std::invalid_argument {
public:
    explicit SigmaNotPositive(const std::string& what) : std::invalid_argument(what) {}
};

class EpsilonTooLarge : public std::invalid_argument {
public:
    explicit EpsilonTooLarge(const std::string& what) : std::invalid_argument(what) {}
};

class InvalidParams : public std::invalid_argument {
public:
    explicit InvalidParams(const std::string& what) : std::invalid_argument(what) {}
};

class ContractionNotObserved : public std::runtime_error {
public:
    explicit ContractionNotObserved(const std::string& what) : std::runtime_error(what) {}
};

// Chain 0 = p_0 <= p_1 <= ... <= p_N; T(p_k) <= p_{k-1} certifies n_T <= N
// when supp(d(T)) <= p_N.
struct FiltrationCertificate {
    std::vector<Matrix> projections;
    int claimed_bound = 0;
};

struct LyapunovWitness {
    Matrix sigma;  // strictly positive
    double c = 0.0;
};

struct LatticeDescriptor {
    bool is_grid = true;               // delta * {0,1,2,...}
    double grid_delta = 0.0;
    std::vector<double> finite_values;  // explicit finite set when !is_grid
};

struct DiscretenessWitness {
    double delta = 0.0;
    double epsilon = 0.0;
    LatticeDescriptor lattice;
};

struct LevelResidual {
    int level = 0;
    double residual = 0.0;
};

struct FiltrationVerdict {
    bool holds = false;
    std::optional<int> implied_bound;  // N when additionally supp(d) <= p_N
    std::vector<LevelResidual> failures;
};

// Checks T(p_k) <= p_{k-1} at every level. Throws MalformedCertificate when
// the chain is not a nested projection chain starting at zero.
FiltrationVerdict verify_filtration(const KrausMap& t, const FiltrationCertificate& cert,
                                    const Tolerances& tol = {});

struct KrausLoweringVerdict {
    bool holds = false;
    double max_residual = 0.0;
    std::vector<LevelResidual> failures;  // level index k, worst residual over r
};

// Checks ||p_k V_r (I - p_{k-1})||_F at every level and Kraus operator.
// Equivalent to verify_filtration for subunital CP maps.
KrausLoweringVerdict kraus_level_lowering(const KrausMap& t, const FiltrationCertificate& cert,
                                          const Tolerances& tol = {});

// Builds a filtration certificate from the kernel flag of the adjoint Kraus
// family, p_k = projection onto {v : all length-k products V_w† kill v}.
// Returns the minimal bound covering supp(d(T)); nullopt when the flag
// stabilizes before covering the defect (no finite certificate exists).
std::optional<FiltrationCertificate> find_flag(const KrausMap& t, const Tolerances& tol = {});

struct RankOneChainVerdict {
    bool applies = false;
    std::string reason;       // first failed condition when !applies
    int corner_rank = 0;      // s
    bool index_confirmed = false;  // n_T == s verified when applies
};

// Rank-one defect-chain criterion: rank-one defect iterates generating a full
// flag with a one-step shift witness per level force n_T = rank(Q).
RankOneChainVerdict rank_one_chain_check(const KrausMap& t, const Tolerances& tol = {});

struct LyapunovVerdict {
    bool holds = false;
    double violation = 0.0;        // most negative eigenvalue of c*sigma - Σ V sigma V†
    std::vector<double> omega_values;  // tr(sigma T^k(d)), k = 0..10
    bool decay_consistent = false;     // observed ratios <= c + 1e-8
};

// Verifies Σ_i V_i σ V_i† <= c σ (compressed to the corner when q given) and
// checks the implied geometric decay of tr(σ T^k(d)) empirically.
LyapunovVerdict lyapunov_check(const KrausMap& t, const LyapunovWitness& w,
                               const Matrix* q = nullptr, const Tolerances& tol = {});

struct DeltaResolutionResult {
    bool valid = false;
    int bound = 0;  // floor(1/delta)
};

// Every value must be 0 (within zero tolerance) or >= delta - zero tolerance.
DeltaResolutionResult delta_resolution_bound(const std::vector<double>& values, double delta,
                                             const Tolerances& tol = {});

// N = 1 + ceil(log(x0/delta) / log(1/c)); returns 1 when x0 < delta.
int contraction_discrete_bound(double x0, double c, double delta);

struct QuantizationVerdict {
    bool holds = false;
    double effective_delta = 0.0;  // delta - epsilon
    std::vector<int> classification;  // per value: 0 -> zero, 1 -> above gap
    std::vector<LevelResidual> failures;  // index, distance to lattice
};

// Verifies each value is within epsilon of the lattice and concludes the
// dichotomy (zero or >= delta - epsilon).
QuantizationVerdict approx_quantization_check(const std::vector<double>& values,
                                              const DiscretenessWitness& w,
                                              const Tolerances& tol = {});

struct TrappingReport {
    std::vector<double> errors;       // e_k = tau(|T^k(d) - a_k|)
    std::vector<double> trace_values; // tau(T^k(d))
    double epsilon0 = 0.0;            // tau(|d - E(d)|)
    double epsilon = 0.0;             // measured almost-invariance defect
    double bound = 0.0;               // epsilon0 + epsilon/(1-c)^2
    bool errors_within_bound = false;
    bool concludes_stabilization = false;  // bound < delta/2 for the witness
};

// Pinches to the block-diagonal algebra given by block_sizes, runs the
// trapped dynamics a_{k+1} = E(T(a_k)) alongside the true orbit, and checks
// the error recursion bound. tau is the normalized trace. Throws
// ContractionNotObserved when the orbit violates the assumed trace
// contraction rate c.
TrappingReport approx_trapping_experiment(const KrausMap& t, const std::vector<int>& block_sizes,
                                          double c, const DiscretenessWitness& lattice,
                                          const Tolerances& tol = {});

}  // namespace defectlab
