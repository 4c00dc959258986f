#include "defectlab/faithfulness.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace defectlab {

namespace {

// Predual X -> Σ_i V_i X V_i† as a dim² x dim² matrix on vectorized inputs.
Matrix predual_superoperator(const KrausMap& t) {
    const int d = t.dim;
    Matrix s = Matrix::Zero(d * d, d * d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1.0;
            Matrix image = Matrix::Zero(d, d);
            for (const Matrix& v : t.kraus) image += v * e * v.adjoint();
            s.col(j * d + i) = vec(image);
        }
    }
    return s;
}

// Hermitian operator basis: diagonal units, real and imaginary off-diagonal pairs.
std::vector<Matrix> hermitian_basis(int d) {
    std::vector<Matrix> basis;
    for (int i = 0; i < d; ++i) {
        Matrix e = Matrix::Zero(d, d);
        e(i, i) = 1.0;
        basis.push_back(e);
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            Matrix re = Matrix::Zero(d, d);
            re(i, j) = inv_sqrt2;
            re(j, i) = inv_sqrt2;
            basis.push_back(re);
            Matrix im = Matrix::Zero(d, d);
            im(i, j) = Complex(0, inv_sqrt2);
            im(j, i) = Complex(0, -inv_sqrt2);
            basis.push_back(im);
        }
    }
    return basis;
}

}  // namespace

CornerFaithfulness corner_faithful(const KrausMap& t, const Matrix& q, const Tolerances& tol) {
    CornerFaithfulness out;
    const Matrix basis = orthonormal_span(q, tol.rank);
    const int s = static_cast<int>(basis.cols());
    if (s == 0) {
        out.faithful = true;
        return out;
    }
    Matrix stacked(static_cast<int>(t.kraus.size()) * t.dim, s);
    for (std::size_t i = 0; i < t.kraus.size(); ++i)
        stacked.middleRows(static_cast<int>(i) * t.dim, t.dim) = t.kraus[i].adjoint() * basis;
    out.common_kernel_dim = s - tolerant_rank_general(stacked, tol.rank);
    out.faithful = out.common_kernel_dim == 0;
    return out;
}

PersistenceEvidence persistence_certificates(const KrausMap& t, const Tolerances& tol) {
    PersistenceEvidence out;
    for (const Matrix& v : t.kraus) {
        Eigen::JacobiSVD<Matrix> svd(v);
        if (svd.singularValues().minCoeff() > 1e-8) {
            out.has_invertible_kraus = true;
            break;
        }
    }
    Matrix vecs(t.dim * t.dim, static_cast<int>(t.kraus.size()));
    for (std::size_t i = 0; i < t.kraus.size(); ++i) vecs.col(static_cast<int>(i)) = vec(t.kraus[i]);
    out.kraus_span_dim = tolerant_rank_general(vecs, tol.rank);
    return out;
}

UnitalityReport unitality_verdict(const KrausMap& t, const Tolerances& tol) {
    UnitalityReport report;
    const DefectOrbitReport orbit = defect_orbit(t, 0, tol);
    report.is_unital = orbit.trivial_defect;
    report.stabilized = orbit.index.stabilized;
    report.persistence = persistence_certificates(t, tol);

    Matrix q;
    if (orbit.trivial_defect) {
        q = Matrix::Zero(t.dim, t.dim);
    } else if (orbit.index.stabilized) {
        q = orbit_support(orbit, tol);
    } else {
        q = reachability_closure(t, tol);
    }
    const CornerFaithfulness cf = corner_faithful(t, q, tol);
    report.corner_faithful = cf.faithful;
    report.common_kernel_dim_on_q = cf.common_kernel_dim;
    report.verdict_consistent =
        !(report.corner_faithful && report.stabilized && !report.is_unital);
    return report;
}

InvariantFunctionalVerdict common_invariant_functional(const std::vector<KrausMap>& family,
                                                       const Matrix& omega,
                                                       const Tolerances& tol) {
    if (!is_hermitian(omega) || min_eigenvalue(omega) <= tol.psd)
        throw OmegaNotFaithful("common_invariant_functional: omega must be strictly positive");
    InvariantFunctionalVerdict verdict;
    verdict.all_invariant = true;
    const double total = omega.trace().real();
    for (const KrausMap& t : family) {
        const Matrix ti = apply_map(t, Matrix::Identity(t.dim, t.dim));
        const double residual = std::abs((hermitize(omega) * ti).trace().real() - total);
        verdict.residuals.push_back(residual);
        if (residual > 1e-9 * total) verdict.all_invariant = false;
    }
    if (verdict.all_invariant) {
        verdict.all_unital = true;
        for (const KrausMap& t : family) {
            const DefectData dd = defect(t, tol.psd);
            if (dd.defect.norm() > tol.zero * (1.0 + dd.defect.norm()))
                verdict.all_unital = false;
        }
    }
    return verdict;
}

SubharmonicReport subharmonic_analysis(const KrausMap& t, const Tolerances& tol) {
    SubharmonicReport report;
    const DefectOrbitReport orbit = defect_orbit(t, 0, tol);

    if (orbit.index.stabilized && !orbit.trivial_defect) {
        // Exclusion route: T(p) >= p iterates to T^m(p) >= p, so a globally
        // nilpotent T admits no nonzero subharmonic projection.
        const int m = orbit.index.index;
        bool annihilates = true;
        for (const Matrix& b : hermitian_basis(t.dim)) {
            if (apply_power(t, b, m).norm() > 1e-10 * (1.0 + b.norm())) {
                annihilates = false;
                break;
            }
        }
        if (annihilates) {
            report.nilpotent_excludes_all = true;
            report.nilpotent_power = m;
            return report;
        }
    }

    // Search route over spectral projections of fixed-point candidates.
    std::vector<Matrix> candidates;
    candidates.push_back(Matrix::Identity(t.dim, t.dim));

    auto add_spectral_cuts = [&](const Matrix& hermitian) {
        const EigH eig = eig_hermitian(hermitize(hermitian));
        Matrix acc = Matrix::Zero(t.dim, t.dim);
        for (int k = 0; k < t.dim; ++k) {
            acc += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
            if (k + 1 < t.dim && std::abs(eig.values(k) - eig.values(k + 1)) < 1e-10) continue;
            candidates.push_back(hermitize(acc));
        }
    };

    const Matrix ti = apply_map(t, Matrix::Identity(t.dim, t.dim));
    add_spectral_cuts(ti);

    // Evolve probes toward fixed points.
    std::vector<Matrix> probes = hermitian_basis(t.dim);
    probes.resize(std::min<std::size_t>(probes.size(), 2 * t.dim));
    for (Matrix probe : probes) {
        Matrix prev = probe;
        for (int k = 0; k < 60; ++k) {
            const Matrix next = apply_map(t, prev);
            if ((next - prev).norm() < 1e-12) break;
            prev = next;
        }
        if (prev.norm() > 1e-8) add_spectral_cuts(prev);
    }

    for (const Matrix& p : candidates) {
        if (p.norm() <= tol.proj) continue;
        ++report.tested_projections;
        if (psd_leq(p, apply_map(t, p), tol.psd)) {
            report.found_subharmonic = p;
            break;
        }
    }
    return report;
}

CornerIrreducibleVerdict corner_irreducible_unitality(const KrausMap& alpha,
                                                      const Tolerances& tol) {
    const int d = alpha.dim;
    Matrix u = Matrix::Identity(d, d);
    bool orbit_stable = false;
    Matrix stabilized;
    for (int k = 0; k <= 4 * d + 8; ++k) {
        const Matrix next = apply_map(alpha, u);
        if ((next - u).norm() <= tol.zero * (1.0 + std::sqrt(static_cast<double>(d)))) {
            orbit_stable = true;
            stabilized = u;
            break;
        }
        u = next;
    }
    if (!orbit_stable)
        throw HypothesesNotMet("corner_irreducible_unitality: unit orbit does not stabilize");
    if (tolerant_rank(stabilized, tol.rank) < d)
        throw HypothesesNotMet("corner_irreducible_unitality: stabilized effect is rank-deficient");

    CornerIrreducibleVerdict verdict;
    const Matrix s = predual_superoperator(alpha);
    Eigen::ComplexEigenSolver<Matrix> eigs(s);

    int best = -1;
    double best_dist = 1e18;
    for (int i = 0; i < eigs.eigenvalues().size(); ++i) {
        const double dist = std::abs(eigs.eigenvalues()(i) - Complex(1.0, 0.0));
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    verdict.fixed_point_eigenvalue = best >= 0 ? std::abs(eigs.eigenvalues()(best)) : 0.0;
    if (best < 0 || best_dist > 1e-8) {
        verdict.inconclusive = true;
        return verdict;
    }

    // Collect the near-1 eigenspace and look for a positive definite
    // Hermitian representative.
    std::vector<Matrix> herm_candidates;
    for (int i = 0; i < eigs.eigenvalues().size(); ++i) {
        if (std::abs(eigs.eigenvalues()(i) - Complex(1.0, 0.0)) > 1e-8) continue;
        const Matrix raw = unvec(eigs.eigenvectors().col(i), d);
        Matrix h = hermitize(raw);
        if (h.norm() < 0.5 * raw.norm()) h = hermitize(Complex(0, 1) * raw);
        if (h.norm() < 1e-12) continue;
        if (h.trace().real() < 0) h = -h;
        herm_candidates.push_back(h);
    }
    if (!herm_candidates.empty()) {
        Matrix total = Matrix::Zero(d, d);
        for (const Matrix& h : herm_candidates) total += h;
        herm_candidates.push_back(total);
    }

    Matrix omega;
    bool found = false;
    for (const Matrix& h : herm_candidates) {
        const double trace = h.trace().real();
        if (std::abs(trace) < 1e-12) continue;
        const Matrix scaled = h / trace;
        if (min_eigenvalue(scaled) > tol.psd) {
            omega = scaled;
            found = true;
            break;
        }
    }
    if (!found) {
        verdict.inconclusive = true;
        return verdict;
    }

    Matrix image = Matrix::Zero(d, d);
    for (const Matrix& v : alpha.kraus) image += v * omega * v.adjoint();
    verdict.invariance_residual = (image - omega).norm();

    const DefectData dd = defect(alpha, tol.psd);
    verdict.unital = dd.defect.norm() <= 100 * tol.zero * (1.0 + dd.defect.norm());
    return verdict;
}

}  // namespace defectlab
