#include "defectlab/certificates.hpp"

#include <algorithm>
#include <cmath>

namespace defectlab {

namespace {

void validate_certificate(const KrausMap& t, const FiltrationCertificate& cert,
                          const Tolerances& tol) {
    if (cert.projections.empty())
        throw MalformedCertificate("filtration: empty projection chain");
    for (const Matrix& p : cert.projections) {
        if (p.rows() != t.dim || p.cols() != t.dim)
            throw MalformedCertificate("filtration: projection dimension mismatch");
        if (!is_projection(p, tol.proj))
            throw MalformedCertificate("filtration: chain entry is not a projection");
    }
    if (cert.projections.front().norm() > tol.proj)
        throw MalformedCertificate("filtration: p_0 must be zero");
    for (std::size_t k = 0; k + 1 < cert.projections.size(); ++k) {
        if (!psd_leq(cert.projections[k], cert.projections[k + 1], tol.psd))
            throw MalformedCertificate("filtration: chain is not non-decreasing");
    }
    if (cert.claimed_bound != static_cast<int>(cert.projections.size()) - 1)
        throw MalformedCertificate("filtration: claimed bound does not match chain length");
}

Matrix span_projection(const Matrix& basis) {
    if (basis.cols() == 0) return Matrix::Zero(basis.rows(), basis.rows());
    return basis * basis.adjoint();
}

}  // namespace

FiltrationVerdict verify_filtration(const KrausMap& t, const FiltrationCertificate& cert,
                                    const Tolerances& tol) {
    validate_certificate(t, cert, tol);
    FiltrationVerdict verdict;
    verdict.holds = true;
    for (std::size_t k = 1; k < cert.projections.size(); ++k) {
        const Matrix gap = cert.projections[k - 1] - apply_map(t, cert.projections[k]);
        const double violation = -std::min(min_eigenvalue(gap), 0.0);
        if (violation > tol.psd) {
            verdict.holds = false;
            verdict.failures.push_back({static_cast<int>(k), violation});
        }
    }
    if (verdict.holds) {
        const DefectData dd = defect(t, tol.psd);
        const Matrix supp = dd.defect.norm() <= tol.zero * (1.0 + dd.defect.norm())
                                ? Matrix::Zero(t.dim, t.dim)
                                : support_projection(dd.defect, tol.rank);
        if (psd_leq(supp, cert.projections.back(), 100 * tol.psd))
            verdict.implied_bound = cert.claimed_bound;
    }
    return verdict;
}

KrausLoweringVerdict kraus_level_lowering(const KrausMap& t, const FiltrationCertificate& cert,
                                          const Tolerances& tol) {
    validate_certificate(t, cert, tol);
    KrausLoweringVerdict verdict;
    verdict.holds = true;
    const Matrix id = Matrix::Identity(t.dim, t.dim);
    for (std::size_t k = 1; k < cert.projections.size(); ++k) {
        double worst = 0.0;
        for (const Matrix& v : t.kraus) {
            const double res = (cert.projections[k] * v * (id - cert.projections[k - 1])).norm();
            worst = std::max(worst, res / (1.0 + v.norm()));
        }
        verdict.max_residual = std::max(verdict.max_residual, worst);
        // The PSD check sees the square of the product residual; match scales
        // so both routes agree on the same certificate.
        if (worst * worst > tol.psd) {
            verdict.holds = false;
            verdict.failures.push_back({static_cast<int>(k), worst});
        }
    }
    return verdict;
}

std::optional<FiltrationCertificate> find_flag(const KrausMap& t, const Tolerances& tol) {
    const DefectData dd = defect(t, tol.psd);
    FiltrationCertificate cert;
    if (dd.defect.norm() <= tol.zero * (1.0 + dd.defect.norm())) {
        cert.projections.push_back(Matrix::Zero(t.dim, t.dim));
        cert.claimed_bound = 0;
        return cert;
    }

    std::vector<Matrix> adjoints;
    for (const Matrix& v : t.kraus) adjoints.push_back(v.adjoint());
    const std::vector<Matrix> flag = kernel_flag_bases(adjoints, t.dim, tol);

    const Matrix defect_basis = orthonormal_span(support_projection(dd.defect, tol.rank), tol.rank);
    int level = -1;
    for (std::size_t k = 0; k < flag.size(); ++k) {
        const Matrix outside =
            (Matrix::Identity(t.dim, t.dim) - span_projection(flag[k])) * defect_basis;
        if (outside.norm() <= 1e-7 * (1.0 + defect_basis.norm())) {
            level = static_cast<int>(k);
            break;
        }
    }
    if (level < 0) return std::nullopt;

    cert.projections.push_back(Matrix::Zero(t.dim, t.dim));
    for (int k = 0; k <= level; ++k)
        cert.projections.push_back(hermitize(span_projection(flag[k])));
    cert.claimed_bound = level + 1;
    return cert;
}

RankOneChainVerdict rank_one_chain_check(const KrausMap& t, const Tolerances& tol) {
    const DefectOrbitReport report = defect_orbit(t, 0, tol);
    if (!report.index.stabilized)
        throw RequiresStabilization("rank_one_chain_check: orbit did not stabilize");

    RankOneChainVerdict verdict;
    if (report.trivial_defect) {
        verdict.reason = "zero defect";
        return verdict;
    }
    const Matrix q = orbit_support(report, tol);
    const int s = tolerant_rank(q, tol.rank);
    verdict.corner_rank = s;

    // (i) rank-one defect iterates
    for (int k = 0; k < s; ++k) {
        if (tolerant_rank(report.orbit[k], tol.rank) != 1) {
            verdict.reason = "defect iterate " + std::to_string(k) + " is not rank one";
            return verdict;
        }
    }
    // (ii) ranges generate a full flag
    const std::vector<Matrix> reach = reachability(t, s - 1 >= 0 ? s - 1 : 0, tol);
    std::vector<Matrix> partial_sums;  // orthonormal bases of R_0 + ... + R_k
    Matrix acc(t.dim, 0);
    for (int k = 0; k < s; ++k) {
        Matrix joined(t.dim, acc.cols() + reach[k].cols());
        joined << acc, reach[k];
        acc = orthonormal_span(joined, tol.rank);
        partial_sums.push_back(acc);
        if (static_cast<int>(acc.cols()) != k + 1) {
            verdict.reason = "reachable sum at level " + std::to_string(k) + " has dimension " +
                             std::to_string(acc.cols());
            return verdict;
        }
    }
    // (iii) one-step shift witness per level
    for (int k = 0; k + 1 < s; ++k) {
        const Matrix prev = k == 0 ? Matrix::Zero(t.dim, t.dim)
                                   : span_projection(partial_sums[k - 1]);
        bool found = false;
        for (const Matrix& v : t.kraus) {
            const Matrix image = v.adjoint() * reach[k];
            const Matrix outside = image - prev * image;
            if (outside.norm() > 1e-7 * (1.0 + image.norm())) {
                found = true;
                break;
            }
        }
        if (!found) {
            verdict.reason = "no shift witness at level " + std::to_string(k);
            return verdict;
        }
    }
    verdict.applies = true;
    verdict.index_confirmed = (report.index.index == s);
    return verdict;
}

LyapunovVerdict lyapunov_check(const KrausMap& t, const LyapunovWitness& w,
                               const Matrix* q, const Tolerances& tol) {
    if (!(w.c > 0.0 && w.c < 1.0))
        throw InvalidParams("lyapunov_check: c must lie in (0,1)");
    if (w.sigma.rows() != t.dim || w.sigma.cols() != t.dim)
        throw DimMismatch("lyapunov_check: sigma dimension mismatch");

    Matrix predual = Matrix::Zero(t.dim, t.dim);
    for (const Matrix& v : t.kraus) predual += v * w.sigma * v.adjoint();
    Matrix lhs = hermitize(predual);
    Matrix rhs = w.c * hermitize(w.sigma);

    if (q) {
        const Matrix basis = orthonormal_span(*q, tol.rank);
        lhs = basis.adjoint() * lhs * basis;
        rhs = basis.adjoint() * rhs * basis;
        if (min_eigenvalue(basis.adjoint() * hermitize(w.sigma) * basis) <= tol.psd)
            throw SigmaNotPositive("lyapunov_check: sigma not strictly positive on the corner");
    } else {
        if (min_eigenvalue(hermitize(w.sigma)) <= tol.psd)
            throw SigmaNotPositive("lyapunov_check: sigma not strictly positive");
    }

    LyapunovVerdict verdict;
    const double gap = min_eigenvalue(rhs - lhs);
    verdict.violation = -std::min(gap, 0.0);
    verdict.holds = gap >= -tol.psd;

    const DefectData dd = defect(t, tol.psd);
    Matrix cur = dd.defect;
    for (int k = 0; k <= 10; ++k) {
        verdict.omega_values.push_back((hermitize(w.sigma) * cur).trace().real());
        cur = apply_map(t, cur);
    }
    verdict.decay_consistent = true;
    for (std::size_t k = 1; k < verdict.omega_values.size(); ++k) {
        const double prev = verdict.omega_values[k - 1];
        if (prev <= tol.zero) continue;
        if (verdict.omega_values[k] > w.c * prev + 1e-8) verdict.decay_consistent = false;
    }
    return verdict;
}

DeltaResolutionResult delta_resolution_bound(const std::vector<double>& values, double delta,
                                             const Tolerances& tol) {
    if (!(delta > 0.0)) throw InvalidParams("delta_resolution_bound: delta must be positive");
    DeltaResolutionResult out;
    out.bound = static_cast<int>(std::floor(1.0 / delta));
    out.valid = true;
    for (double v : values) {
        if (v <= tol.zero) continue;
        if (v < delta - tol.zero) out.valid = false;
    }
    return out;
}

int contraction_discrete_bound(double x0, double c, double delta) {
    if (!(c > 0.0 && c < 1.0) || !(delta > 0.0) || x0 < 0.0)
        throw InvalidParams("contraction_discrete_bound: need 0<c<1, delta>0, x0>=0");
    if (x0 < delta) return 1;
    return 1 + static_cast<int>(std::ceil(std::log(x0 / delta) / std::log(1.0 / c)));
}

namespace {

double lattice_distance(double v, const LatticeDescriptor& lattice) {
    if (lattice.is_grid) {
        const double d = lattice.grid_delta;
        const double nearest = d * std::max(0.0, std::round(v / d));
        return std::abs(v - nearest);
    }
    double best = std::numeric_limits<double>::infinity();
    for (double x : lattice.finite_values) best = std::min(best, std::abs(v - x));
    return best;
}

}  // namespace

QuantizationVerdict approx_quantization_check(const std::vector<double>& values,
                                              const DiscretenessWitness& w,
                                              const Tolerances& tol) {
    if (!(w.delta > 0.0)) throw InvalidParams("approx_quantization_check: delta must be positive");
    if (w.epsilon >= w.delta / 2.0)
        throw EpsilonTooLarge("approx_quantization_check: epsilon must be below delta/2");

    QuantizationVerdict verdict;
    verdict.holds = true;
    verdict.effective_delta = w.delta - w.epsilon;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        const double dist = lattice_distance(v, w.lattice);
        if (dist > w.epsilon + tol.zero) {
            verdict.holds = false;
            verdict.failures.push_back({static_cast<int>(i), dist});
            verdict.classification.push_back(-1);
            continue;
        }
        if (v <= w.epsilon + tol.zero) {
            verdict.classification.push_back(0);
        } else if (v >= verdict.effective_delta - tol.zero) {
            verdict.classification.push_back(1);
        } else {
            // Inside the forbidden band (0, delta - epsilon): dichotomy broken.
            verdict.holds = false;
            verdict.failures.push_back({static_cast<int>(i), dist});
            verdict.classification.push_back(-1);
        }
    }
    return verdict;
}

TrappingReport approx_trapping_experiment(const KrausMap& t, const std::vector<int>& block_sizes,
                                          double c, const DiscretenessWitness& lattice,
                                          const Tolerances& tol) {
    if (!(c > 0.0 && c < 1.0))
        throw InvalidParams("approx_trapping_experiment: c must lie in (0,1)");
    int total = 0;
    for (int b : block_sizes) {
        if (b <= 0) throw InvalidParams("approx_trapping_experiment: block sizes must be positive");
        total += b;
    }
    if (total != t.dim)
        throw InvalidParams("approx_trapping_experiment: block sizes must partition the dimension");

    std::vector<Matrix> blocks;
    int offset = 0;
    for (int b : block_sizes) {
        Matrix p = Matrix::Zero(t.dim, t.dim);
        p.block(offset, offset, b, b) = Matrix::Identity(b, b);
        blocks.push_back(p);
        offset += b;
    }
    auto pinch = [&](const Matrix& x) {
        Matrix out = Matrix::Zero(t.dim, t.dim);
        for (const Matrix& p : blocks) out += p * x * p;
        return out;
    };
    auto tau = [&](const Matrix& x) { return x.trace().real() / t.dim; };
    auto tau_abs = [&](const Matrix& x) { return trace_norm(hermitize(x)) / t.dim; };

    const DefectData dd = defect(t, tol.psd);
    const int steps = 4 * t.dim;

    TrappingReport report;
    report.epsilon0 = tau_abs(dd.defect - pinch(dd.defect));

    Matrix x = dd.defect;       // true orbit
    Matrix a = pinch(dd.defect);  // trapped orbit
    double eps = 0.0;
    std::vector<Matrix> trapped_orbit;
    for (int k = 0; k < steps; ++k) {
        report.trace_values.push_back(tau(x));
        report.errors.push_back(tau_abs(x - a));
        trapped_orbit.push_back(a);
        const Matrix ta = apply_map(t, a);
        const double denom = tau(a);
        if (denom > tol.zero)
            eps = std::max(eps, tau_abs(ta - pinch(ta)) / denom);
        x = apply_map(t, x);
        a = pinch(ta);
    }
    report.epsilon = eps;

    for (std::size_t k = 0; k + 1 < report.trace_values.size(); ++k) {
        if (report.trace_values[k + 1] > c * report.trace_values[k] + tol.zero)
            throw ContractionNotObserved(
                "approx_trapping_experiment: trace contraction at rate c not observed");
    }

    report.bound = report.epsilon0 + report.epsilon / ((1.0 - c) * (1.0 - c));
    report.errors_within_bound = true;
    for (double e : report.errors)
        if (e > report.bound + tol.zero) report.errors_within_bound = false;
    report.concludes_stabilization =
        report.errors_within_bound && report.bound < lattice.delta / 2.0;
    return report;
}

}  // namespace defectlab
