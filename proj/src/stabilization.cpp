#include "defectlab/stabilization.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace defectlab {

namespace {

bool orbit_zero(const Matrix& x, double scale, const Tolerances& tol) {
    return x.norm() <= tol.zero * (1.0 + scale);
}

// Projection onto the subspace spanned by the columns of an isometry.
Matrix span_projection(const Matrix& basis) {
    if (basis.cols() == 0) return Matrix::Zero(basis.rows(), basis.rows());
    return basis * basis.adjoint();
}

}  // namespace

DefectOrbitReport defect_orbit(const KrausMap& t, int max_iter, const Tolerances& tol) {
    if (max_iter <= 0) max_iter = 4 * t.dim;
    const DefectData dd = defect(t, tol.psd);

    DefectOrbitReport report;
    report.defect_scale = dd.defect.norm();
    report.orbit.push_back(dd.defect);

    if (orbit_zero(dd.defect, report.defect_scale, tol)) {
        report.trivial_defect = true;
        report.index = {true, 1};
        report.orbit.push_back(apply_map(t, dd.defect));
        return report;
    }

    Matrix cur = dd.defect;
    for (int k = 1; k <= max_iter; ++k) {
        cur = apply_map(t, cur);
        report.orbit.push_back(cur);
        if (orbit_zero(cur, report.defect_scale, tol)) {
            // Once zero, stays zero (modest slack for roundoff amplification).
            const double slack = 10.0 * t.dim * tol.zero * (1.0 + report.defect_scale);
            Matrix probe = cur;
            for (int extra = 0; extra < 3; ++extra) {
                probe = apply_map(t, probe);
                if (probe.norm() > slack)
                    throw std::runtime_error("defect_orbit: orbit left zero after annihilation");
            }
            report.index = {true, k};
            return report;
        }
    }
    report.index = {false, max_iter};
    return report;
}

Matrix orbit_support(const DefectOrbitReport& report, const Tolerances& tol) {
    if (!report.index.stabilized)
        throw RequiresStabilization("orbit_support: orbit did not stabilize");
    const int dim = static_cast<int>(report.orbit.front().rows());
    Matrix sum = Matrix::Zero(dim, dim);
    for (int k = 0; k < report.index.index && k < static_cast<int>(report.orbit.size()); ++k)
        sum += report.orbit[k];
    if (report.trivial_defect) return Matrix::Zero(dim, dim);
    return support_projection(sum, tol.rank, 10 * tol.psd * (1.0 + sum.norm()));
}

Matrix reachability_closure(const KrausMap& t, const Tolerances& tol) {
    const DefectData dd = defect(t, tol.psd);
    if (orbit_zero(dd.defect, dd.defect.norm(), tol))
        return Matrix::Zero(t.dim, t.dim);

    Matrix basis = orthonormal_span(support_projection(dd.defect, tol.rank), tol.rank);
    for (int round = 0; round < t.dim + 1; ++round) {
        Matrix candidates(t.dim, basis.cols() * (t.kraus.size() + 1));
        candidates.leftCols(basis.cols()) = basis;
        int col = static_cast<int>(basis.cols());
        for (const Matrix& v : t.kraus)
            for (int j = 0; j < basis.cols(); ++j) candidates.col(col++) = v.adjoint() * basis.col(j);
        Matrix next = orthonormal_span(candidates, tol.rank);
        if (next.cols() == basis.cols()) break;
        basis = next;
    }
    return hermitize(span_projection(basis));
}

CornerData corner_map(const KrausMap& t, const Matrix& q, const Matrix& accumulated,
                      const Tolerances& tol) {
    const int s = tolerant_rank(q, tol.rank);
    if (s == 0) throw ZeroCorner("corner_map: zero corner");

    Matrix isometry;
    if (accumulated.size() > 0) {
        const EigH eig = eig_hermitian(accumulated);
        const double cutoff = tol.rank * std::max(eig.values.maxCoeff(), 1.0);
        int r = 0;
        for (int k = 0; k < eig.values.size(); ++k)
            if (eig.values(k) > cutoff) ++r;
        isometry = eig.vectors.leftCols(r);
    } else {
        const EigH eig = eig_hermitian(q);
        isometry = eig.vectors.leftCols(s);
    }

    CornerData out;
    out.isometry = isometry;
    out.map.dim = static_cast<int>(isometry.cols());
    for (const Matrix& v : t.kraus)
        out.map.kraus.push_back(isometry.adjoint() * v * isometry);
    out.map.label = t.label.empty() ? "corner" : t.label + "|corner";
    return out;
}

CornerData corner_map(const KrausMap& t, const Matrix& q, const Tolerances& tol) {
    return corner_map(t, q, Matrix(), tol);
}

std::vector<Matrix> kernel_flag_bases(const std::vector<Matrix>& ops, int dim,
                                      const Tolerances& tol) {
    std::vector<Matrix> flag;
    Matrix stacked(static_cast<int>(ops.size()) * dim, dim);
    for (std::size_t i = 0; i < ops.size(); ++i)
        stacked.middleRows(static_cast<int>(i) * dim, dim) = ops[i];
    Matrix cur = null_space(stacked, tol.rank);
    flag.push_back(cur);
    while (cur.cols() < dim) {
        // N_{k+1} = {v : (I - P_k) V_i v = 0 for all i}.
        const Matrix complement = Matrix::Identity(dim, dim) - span_projection(cur);
        Matrix next_stack(static_cast<int>(ops.size()) * dim, dim);
        for (std::size_t i = 0; i < ops.size(); ++i)
            next_stack.middleRows(static_cast<int>(i) * dim, dim) = complement * ops[i];
        Matrix next = null_space(next_stack, tol.rank);
        if (next.cols() <= cur.cols()) break;
        flag.push_back(next);
        cur = next;
    }
    return flag;
}

std::optional<int> nilpotency_index(const KrausMap& alpha, const Tolerances& tol) {
    const std::vector<Matrix> flag = kernel_flag_bases(alpha.kraus, alpha.dim, tol);
    for (std::size_t k = 0; k < flag.size(); ++k)
        if (flag[k].cols() == alpha.dim) return static_cast<int>(k) + 1;
    return std::nullopt;
}

std::vector<int> word_kernel_dims(const KrausMap& alpha, int k_max, const Tolerances& tol) {
    const std::vector<Matrix> flag = kernel_flag_bases(alpha.kraus, alpha.dim, tol);
    std::vector<int> dims;
    dims.push_back(0);  // H_0 = {0}
    for (int k = 1; k <= k_max; ++k) {
        if (k - 1 < static_cast<int>(flag.size()))
            dims.push_back(static_cast<int>(flag[k - 1].cols()));
        else
            dims.push_back(dims.back());
    }
    return dims;
}

std::vector<int> unit_orbit_kernel_dims(const KrausMap& alpha, int k_max,
                                        const Tolerances& tol) {
    std::vector<int> dims;
    Matrix cur = Matrix::Identity(alpha.dim, alpha.dim);
    for (int k = 0; k <= k_max; ++k) {
        dims.push_back(alpha.dim - tolerant_rank(cur, tol.rank));
        cur = apply_map(alpha, cur);
    }
    return dims;
}

NilpotentType classify_nilpotent_type(const KrausMap& alpha, const Tolerances& tol) {
    NilpotentType out;
    const int s = alpha.dim;
    Matrix cur = Matrix::Identity(s, s);
    for (int k = 0; k <= s; ++k) {
        out.rank_sequence.push_back(tolerant_rank(cur, tol.rank));
        cur = apply_map(alpha, cur);
    }
    if (out.rank_sequence.back() != 0)
        throw NotNilpotent("classify_nilpotent_type: alpha^s(I) is not zero");
    out.is_maximal = true;
    for (int k = 0; k <= s; ++k)
        if (out.rank_sequence[k] != s - k) out.is_maximal = false;
    return out;
}

std::vector<Matrix> reachability(const KrausMap& t, int k_max, const Tolerances& tol) {
    const DefectData dd = defect(t, tol.psd);
    if (orbit_zero(dd.defect, dd.defect.norm(), tol))
        throw ZeroDefect("reachability: zero defect");

    std::vector<Matrix> bases;
    Matrix cur = orthonormal_span(support_projection(dd.defect, tol.rank), tol.rank);
    bases.push_back(cur);
    for (int k = 1; k <= k_max; ++k) {
        if (cur.cols() == 0) {
            bases.push_back(cur);
            continue;
        }
        Matrix candidates(t.dim, cur.cols() * t.kraus.size());
        int col = 0;
        for (const Matrix& v : t.kraus)
            for (int j = 0; j < cur.cols(); ++j) candidates.col(col++) = v.adjoint() * cur.col(j);
        cur = orthonormal_span(candidates, tol.rank);
        bases.push_back(cur);
    }
    return bases;
}

RankBounds rank_bounds(const KrausMap& t, const DefectOrbitReport& report,
                       const Tolerances& tol) {
    if (!report.index.stabilized)
        throw RequiresStabilization("rank_bounds: orbit did not stabilize");
    RankBounds rb;
    rb.rank_defect = tolerant_rank(report.orbit.front(), tol.rank);
    rb.rank_unit_image = tolerant_rank(apply_map(t, Matrix::Identity(t.dim, t.dim)), tol.rank);
    int kraus_ranks = 0;
    for (const Matrix& v : t.kraus) kraus_ranks += tolerant_rank_general(v, tol.rank);
    rb.kraus_bound = std::min(rb.rank_defect + kraus_ranks, t.dim);
    rb.intrinsic_bound = std::min(rb.rank_defect + rb.rank_unit_image, t.dim);
    rb.actual_rank_q = tolerant_rank(orbit_support(report, tol), tol.rank);
    return rb;
}

AsymptoticDefect asymptotic_defect(const KrausMap& t, const Tolerances& tol) {
    AsymptoticDefect out;
    const DefectData dd = defect(t, tol.psd);
    const double scale = dd.defect.norm();

    if (orbit_zero(dd.defect, scale, tol)) {
        out.convergent = true;
        out.spectral_radius = 0.0;
        out.leakage_dim = 0;
        out.d_inf = Matrix::Zero(t.dim, t.dim);
        out.residual = (out.d_inf - dd.defect - apply_map(t, out.d_inf)).norm();
        return out;
    }

    // Span closure of the defect orbit in vectorized form (Gram-Schmidt with
    // relative tolerance, capped at dim^2).
    const int cap = t.dim * t.dim;
    std::vector<CVector> basis;
    std::vector<CVector> pending;
    pending.push_back(vec(dd.defect));
    while (!pending.empty() && static_cast<int>(basis.size()) < cap) {
        CVector w = pending.back();
        pending.pop_back();
        const double initial = w.norm();
        for (const CVector& b : basis) w -= b.dot(w) * b;
        if (w.norm() > 1e-9 * (1.0 + initial)) {
            w.normalize();
            basis.push_back(w);
            pending.push_back(vec(apply_map(t, unvec(w, t.dim))));
        }
    }
    const int m = static_cast<int>(basis.size());
    out.leakage_dim = m;

    // Matrix of T restricted to the leakage subspace.
    Matrix a(m, m);
    for (int k = 0; k < m; ++k) {
        const CVector image = vec(apply_map(t, unvec(basis[k], t.dim)));
        for (int j = 0; j < m; ++j) a(j, k) = basis[j].dot(image);
    }
    Eigen::ComplexEigenSolver<Matrix> eigs(a);
    out.spectral_radius = eigs.eigenvalues().cwiseAbs().maxCoeff();

    if (out.spectral_radius >= 1.0 - 1e-8) return out;

    CVector d_coords(m);
    const CVector d_vec = vec(dd.defect);
    for (int j = 0; j < m; ++j) d_coords(j) = basis[j].dot(d_vec);
    const CVector x = (Matrix::Identity(m, m) - a).fullPivLu().solve(d_coords);
    CVector lifted = CVector::Zero(t.dim * t.dim);
    for (int j = 0; j < m; ++j) lifted += x(j) * basis[j];

    out.convergent = true;
    out.d_inf = hermitize(unvec(lifted, t.dim));
    out.residual = (out.d_inf - dd.defect - apply_map(t, out.d_inf)).norm();
    return out;
}

namespace {

// Size of the largest Jordan block among eigenvalues of modulus within 1e-6
// of the spectral radius, estimated by tolerance-rank of (A - lambda I)^k.
int jordan_block_estimate(const Matrix& a, double radius) {
    Eigen::ComplexEigenSolver<Matrix> eigs(a);
    const int m = static_cast<int>(a.rows());
    int largest = 1;
    for (int i = 0; i < eigs.eigenvalues().size(); ++i) {
        const Complex lambda = eigs.eigenvalues()(i);
        if (std::abs(std::abs(lambda) - radius) > 1e-6) continue;
        const Matrix shifted = a - lambda * Matrix::Identity(m, m);
        Matrix power = Matrix::Identity(m, m);
        int prev_rank = m;
        for (int k = 1; k <= m; ++k) {
            power = power * shifted;
            const int rank = tolerant_rank_general(power, 1e-7);
            if (rank == prev_rank) break;
            prev_rank = rank;
            largest = std::max(largest, k);
        }
    }
    return largest;
}

}  // namespace

TailEstimate tail_estimate(const KrausMap& t, const AsymptoticDefect& ad, int n,
                           const Tolerances& tol) {
    if (!ad.convergent)
        throw std::runtime_error("tail_estimate: asymptotic defect is divergent");
    if (n < 1) throw std::invalid_argument("tail_estimate: n must be >= 1");

    const DefectData dd = defect(t, tol.psd);
    auto tail_at = [&](int steps) {
        Matrix partial = Matrix::Zero(t.dim, t.dim);
        Matrix cur = dd.defect;
        for (int k = 0; k < steps; ++k) {
            partial += cur;
            cur = apply_map(t, cur);
        }
        return (ad.d_inf - partial).norm();
    };

    TailEstimate out;
    out.rate = ad.spectral_radius;
    out.observed = tail_at(n);

    if (ad.leakage_dim == 0) {
        out.jordan_block = 1;
        out.bound = 0.0;
        out.constant = 0.0;
        return out;
    }

    // Rebuild the restriction to estimate the block size.
    std::vector<CVector> basis;
    std::vector<CVector> pending;
    pending.push_back(vec(dd.defect));
    const int cap = t.dim * t.dim;
    while (!pending.empty() && static_cast<int>(basis.size()) < cap) {
        CVector w = pending.back();
        pending.pop_back();
        const double initial = w.norm();
        for (const CVector& b : basis) w -= b.dot(w) * b;
        if (w.norm() > 1e-9 * (1.0 + initial)) {
            w.normalize();
            basis.push_back(w);
            pending.push_back(vec(apply_map(t, unvec(w, t.dim))));
        }
    }
    const int m = static_cast<int>(basis.size());
    Matrix a(m, m);
    for (int k = 0; k < m; ++k) {
        const CVector image = vec(apply_map(t, unvec(basis[k], t.dim)));
        for (int j = 0; j < m; ++j) a(j, k) = basis[j].dot(image);
    }
    out.jordan_block = jordan_block_estimate(a, ad.spectral_radius);

    if (ad.spectral_radius <= 1e-12) {
        // Nilpotent restriction: the tail vanishes from the block size onward.
        out.constant = 0.0;
        out.bound = 0.0;
        return out;
    }
    const double first = tail_at(1);
    out.constant = first / ad.spectral_radius;
    out.bound = out.constant * std::pow(static_cast<double>(n), out.jordan_block - 1) *
                std::pow(ad.spectral_radius, n);
    return out;
}

}  // namespace defectlab
