// stabilization.hpp — Defect orbits, stabilization indices, orbit-support
// corners, nilpotent-type classification, reachability and asymptotic defects.

#pragma once

#include "defectlab/channel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace defectlab {

class RequiresStabilization : public std::runtime_error {
public:
    explicit RequiresStabilization(const std::string& what) : std::runtime_error(what) {}
};

class NotNilpotent : public std::runtime_error {
public:
    explicit NotNilpotent(const std::string& what) : std::runtime_error(what) {}
};

class ZeroDefect : public std::runtime_error {
public:
    explicit ZeroDefect(const std::string& what) : std::runtime_error(what) {}
};

class ZeroCorner : public std::runtime_error {
public:
    explicit ZeroCorner(const std::string& what) : std::runtime_error(what) {}
};

struct StabilizationOutcome {
    bool stabilized = false;
    int index = 0;  // n with T^n(d) = 0 when stabilized, otherwise max_iter
};

struct RankBounds {
    int rank_defect = 0;
    int rank_unit_image = 0;  // rank T(I)
    int kraus_bound = 0;      // rank d + Σ rank V_i, capped at dim
    int intrinsic_bound = 0;  // rank d + rank T(I), capped at dim
    int actual_rank_q = 0;
};

struct DefectOrbitReport {
    std::vector<Matrix> orbit;  // D_0 .. D_n (or up to cutoff)
    StabilizationOutcome index;
    bool trivial_defect = false;  // d(T) already numerically zero
    double defect_scale = 0.0;    // ||d(T)||_F, the zero-test scale
};

// Orbit and stabilization index. max_iter <= 0 selects the default 4*dim.
// Once the orbit hits numerical zero it is checked to stay zero for three
// further steps.
DefectOrbitReport defect_orbit(const KrausMap& t, int max_iter = 0,
                               const Tolerances& tol = {});

// Q = supp(Σ_{k<n} D_k). Requires a stabilized report.
Matrix orbit_support(const DefectOrbitReport& report, const Tolerances& tol = {});

// Projection onto the span closure of the reachable subspaces R_0, R_1, ...
// Defined whenever d(T) is nonzero; agrees with orbit_support on stabilized
// maps and extends it to maps that only stabilize asymptotically.
Matrix reachability_closure(const KrausMap& t, const Tolerances& tol = {});

struct CornerData {
    Matrix isometry;  // dim x s, columns span range(Q)
    KrausMap map;     // compressed Kraus family B† V_i B on C^s
};

// Compression of T to the range of Q. The isometry comes from eigenvectors of
// the accumulated defect when available (deterministic sign convention),
// otherwise from Q itself.
CornerData corner_map(const KrausMap& t, const Matrix& q, const Tolerances& tol = {});
CornerData corner_map(const KrausMap& t, const Matrix& q, const Matrix& accumulated,
                      const Tolerances& tol = {});

// Orthonormal bases of the kernel flag N_1 ⊆ N_2 ⊆ ... of a matrix family,
// N_1 = ∩ ker A_i, N_{k+1} = {v : A_i v ∈ N_k for all i}, listed until the
// flag stabilizes or reaches the full space.
std::vector<Matrix> kernel_flag_bases(const std::vector<Matrix>& ops, int dim,
                                      const Tolerances& tol = {});

// Nilpotency index of a CP map via the kernel-flag recursion
// N_1 = ∩ ker V_i, N_{k+1} = {v : V_i v ∈ N_k}. nullopt when the flag
// stabilizes strictly below the full space.
std::optional<int> nilpotency_index(const KrausMap& alpha, const Tolerances& tol = {});

// dim ∩_{|w|=k} ker(V_w) for k = 0..k_max, via the recursion (words are never
// enumerated beyond length one).
std::vector<int> word_kernel_dims(const KrausMap& alpha, int k_max,
                                  const Tolerances& tol = {});

// dim ker(alpha^k(I)) for k = 0..k_max, the direct route the word kernels
// must agree with.
std::vector<int> unit_orbit_kernel_dims(const KrausMap& alpha, int k_max,
                                        const Tolerances& tol = {});

struct NilpotentType {
    std::vector<int> rank_sequence;  // rank alpha^k(I), k = 0..s
    bool is_maximal = false;         // rank_sequence[k] == s - k for all k
};

// Throws NotNilpotent when alpha^s(I) is not numerically zero.
NilpotentType classify_nilpotent_type(const KrausMap& alpha, const Tolerances& tol = {});

// Orthonormal bases of R_0 = Ran d(T), R_{k+1} = Σ_i V_i†(R_k), k <= k_max.
std::vector<Matrix> reachability(const KrausMap& t, int k_max, const Tolerances& tol = {});

RankBounds rank_bounds(const KrausMap& t, const DefectOrbitReport& report,
                       const Tolerances& tol = {});

struct AsymptoticDefect {
    bool convergent = false;
    double spectral_radius = 0.0;
    int leakage_dim = 0;  // dim of the span of the defect orbit
    Matrix d_inf;         // empty when divergent
    double residual = 0.0;  // ||d_inf - d(T) - T(d_inf)||_F
};

AsymptoticDefect asymptotic_defect(const KrausMap& t, const Tolerances& tol = {});

struct TailEstimate {
    double observed = 0.0;   // ||d_inf - Σ_{k<n} T^k(d)||_F
    double bound = 0.0;      // C * n^{m-1} * r^n
    double constant = 0.0;   // C, calibrated at n = 1
    int jordan_block = 1;    // m, largest-block estimate at the spectral radius
    double rate = 0.0;       // r
    bool heuristic = true;   // the block estimate is numerically fragile
};

// Requires a convergent asymptotic defect. For nilpotent restrictions
// (r below tolerance) the bound degenerates to 0 and is valid for
// n >= jordan_block only.
TailEstimate tail_estimate(const KrausMap& t, const AsymptoticDefect& ad, int n,
                           const Tolerances& tol = {});

}  // namespace defectlab
