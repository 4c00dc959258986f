#include "defectlab/classical.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace defectlab {

using boost::multiprecision::cpp_int;

void validate_system(const SubMarkovSystem& sys) {
    if (sys.atoms <= 0) throw std::invalid_argument("SubMarkovSystem: atoms must be positive");
    if (static_cast<int>(sys.weights.size()) != sys.atoms ||
        static_cast<int>(sys.coeffs.size()) != sys.atoms)
        throw std::invalid_argument("SubMarkovSystem: size mismatch");
    for (const Rational& w : sys.weights)
        if (w <= 0) throw std::invalid_argument("SubMarkovSystem: weights must be positive");
    for (int i = 0; i < sys.atoms; ++i) {
        if (static_cast<int>(sys.coeffs[i].size()) != sys.atoms)
            throw std::invalid_argument("SubMarkovSystem: coefficient row size mismatch");
        Rational row_sum = 0;
        for (const Rational& p : sys.coeffs[i]) {
            if (p < 0) throw std::invalid_argument("SubMarkovSystem: negative coefficient");
            row_sum += p;
        }
        if (row_sum > 1)
            throw std::invalid_argument("SubMarkovSystem: row sum exceeds one (not subunital)");
    }
}

Rational rational_from_string(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(cpp_int(text));
        const cpp_int num(text.substr(0, slash));
        const cpp_int den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("rational_from_string: cannot parse '" + text + "'");
    }
}

std::string rational_to_string(const Rational& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

namespace {

std::vector<std::vector<int>> out_edges(const SubMarkovSystem& sys) {
    // edge j -> i iff p_ij > 0
    std::vector<std::vector<int>> edges(sys.atoms);
    for (int i = 0; i < sys.atoms; ++i)
        for (int j = 0; j < sys.atoms; ++j)
            if (sys.coeffs[i][j] > 0) edges[j].push_back(i);
    return edges;
}

std::vector<bool> reachable_set(const std::vector<std::vector<int>>& edges,
                                const std::vector<int>& start) {
    std::vector<bool> seen(edges.size(), false);
    std::vector<int> stack;
    for (int v : start) {
        if (!seen[v]) {
            seen[v] = true;
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : edges[v]) {
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

}  // namespace

DigraphResult digraph_height(const SubMarkovSystem& sys, const std::vector<int>& support) {
    validate_system(sys);
    if (support.empty()) throw EmptySupport("digraph_height: empty support");
    for (int v : support)
        if (v < 0 || v >= sys.atoms) throw EmptySupport("digraph_height: support index out of range");

    const auto edges = out_edges(sys);
    const auto reachable = reachable_set(edges, support);

    // Cycle detection on the reachable subgraph (DFS colors, explicit stack).
    enum Color { White, Gray, Black };
    std::vector<Color> color(sys.atoms, White);
    std::vector<int> parent(sys.atoms, -1);
    DigraphResult result;

    for (int root = 0; root < sys.atoms; ++root) {
        if (!reachable[root] || color[root] != White) continue;
        std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
        color[root] = Gray;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next < edges[v].size()) {
                const int w = edges[v][next++];
                if (!reachable[w]) continue;
                if (color[w] == Gray) {
                    // Recover the cycle w -> ... -> v -> w from the DFS stack.
                    std::vector<int> cycle;
                    bool collecting = false;
                    for (const auto& [node, ignored] : stack) {
                        if (node == w) collecting = true;
                        if (collecting) cycle.push_back(node);
                    }
                    result.finite = false;
                    result.cycle = cycle;
                    return result;
                }
                if (color[w] == White) {
                    color[w] = Gray;
                    stack.push_back({w, 0});
                }
            } else {
                color[v] = Black;
                stack.pop_back();
            }
        }
    }

    // Acyclic: longest path (edge count) starting in the support, by
    // memoized DFS over the reachable DAG.
    std::vector<int> longest(sys.atoms, -1);
    auto compute = [&](auto&& self, int v) -> int {
        if (longest[v] >= 0) return longest[v];
        int best = 0;
        for (int w : edges[v])
            if (reachable[w]) best = std::max(best, 1 + self(self, w));
        longest[v] = best;
        return best;
    };
    int height = 0;
    for (int v : support) height = std::max(height, compute(compute, v));
    result.finite = true;
    result.height = height;
    return result;
}

ClassicalOrbit classical_orbit(const SubMarkovSystem& sys, const std::vector<Rational>& defect,
                               int max_iter) {
    validate_system(sys);
    if (static_cast<int>(defect.size()) != sys.atoms)
        throw std::invalid_argument("classical_orbit: defect size mismatch");
    for (const Rational& d : defect)
        if (d < 0 || d > 1)
            throw std::invalid_argument("classical_orbit: defect entries must lie in [0,1]");
    if (max_iter <= 0) max_iter = (1 << std::min(sys.atoms, 20)) + sys.atoms + 2;

    auto is_zero = [](const std::vector<Rational>& v) {
        for (const Rational& x : v)
            if (x != 0) return false;
        return true;
    };
    auto support_of = [](const std::vector<Rational>& v) {
        std::vector<int> s;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[j] != 0) s.push_back(static_cast<int>(j));
        return s;
    };

    ClassicalOrbit out;
    out.orbit.push_back(defect);

    std::set<std::vector<int>> seen_supports;
    seen_supports.insert(support_of(defect));

    std::vector<Rational> cur = defect;
    for (int k = 1; k <= max_iter; ++k) {
        std::vector<Rational> next(sys.atoms, Rational(0));
        for (int i = 0; i < sys.atoms; ++i)
            for (int j = 0; j < sys.atoms; ++j)
                if (sys.coeffs[i][j] != 0 && cur[j] != 0) next[i] += sys.coeffs[i][j] * cur[j];
        out.orbit.push_back(next);
        if (is_zero(next)) {
            out.stabilized = true;
            out.index = k;
            return out;
        }
        const std::vector<int> supp = support_of(next);
        if (!seen_supports.insert(supp).second) {
            // Support sets evolve deterministically; a repeated nonempty
            // support certifies the orbit never hits zero.
            out.stabilized = false;
            const DigraphResult dg = digraph_height(sys, supp);
            out.cycle_witness = dg.cycle;
            return out;
        }
        cur = std::move(next);
    }
    out.stabilized = false;
    return out;
}

std::vector<Rational> system_defect(const SubMarkovSystem& sys) {
    validate_system(sys);
    std::vector<Rational> d(sys.atoms, Rational(1));
    for (int i = 0; i < sys.atoms; ++i)
        for (int j = 0; j < sys.atoms; ++j) d[i] -= sys.coeffs[i][j];
    return d;
}

RankFunctionVerdict rank_function_verify(const SubMarkovSystem& sys, const std::vector<int>& rank,
                                         const std::vector<Rational>& defect) {
    validate_system(sys);
    if (static_cast<int>(rank.size()) != sys.atoms)
        throw std::invalid_argument("rank_function_verify: rank function size mismatch");
    for (int r : rank)
        if (r < 0) throw std::invalid_argument("rank_function_verify: rank values must be >= 0");

    RankFunctionVerdict verdict;
    verdict.holds = true;
    for (int i = 0; i < sys.atoms && verdict.holds; ++i) {
        for (int j = 0; j < sys.atoms; ++j) {
            if (sys.coeffs[i][j] > 0 && rank[i] >= rank[j]) {
                verdict.holds = false;
                verdict.offending_edge = {j, i};
                break;
            }
        }
    }
    if (!verdict.holds) return verdict;

    const int h = *std::max_element(rank.begin(), rank.end());
    verdict.bound = h + 1;

    const ClassicalOrbit orbit = classical_orbit(sys, defect, 0);
    verdict.orbit_confirms = orbit.stabilized && orbit.index <= verdict.bound;

    // Induced filtration p_k = 1_{rank <= k-1}; P(p_k) <= p_{k-1} exactly.
    verdict.filtration_exact = true;
    for (int k = 1; k <= verdict.bound; ++k) {
        for (int i = 0; i < sys.atoms; ++i) {
            Rational image = 0;
            for (int j = 0; j < sys.atoms; ++j)
                if (rank[j] <= k - 1) image += sys.coeffs[i][j];
            const Rational cap = rank[i] <= k - 2 ? Rational(1) : Rational(0);
            if (image > cap) verdict.filtration_exact = false;
        }
    }
    return verdict;
}

namespace {

bool in_lattice(const Rational& q, unsigned n) {
    if (q < 0 || q > 1) return false;
    return denominator(Rational(q * n)) == 1;
}

}  // namespace

BoundedDenomVerdict bounded_denominator_propagation(const SubMarkovSystem& sys,
                                                    const std::vector<Rational>& defect,
                                                    unsigned N, int k_max) {
    validate_system(sys);
    if (N == 0) throw std::invalid_argument("bounded_denominator_propagation: N must be positive");

    BoundedDenomVerdict verdict;
    verdict.hypothesis_holds = true;
    for (const auto& row : sys.coeffs)
        for (const Rational& p : row)
            if (!in_lattice(p, N)) verdict.hypothesis_holds = false;
    for (const Rational& d : defect)
        if (!in_lattice(d, N)) verdict.hypothesis_holds = false;
    if (!verdict.hypothesis_holds) return verdict;

    const ClassicalOrbit orbit = classical_orbit(sys, defect, k_max);
    verdict.orbit_in_lattice = true;
    for (std::size_t k = 0; k < orbit.orbit.size(); ++k) {
        for (int j = 0; j < sys.atoms; ++j) {
            if (!in_lattice(orbit.orbit[k][j], N)) {
                verdict.orbit_in_lattice = false;
                verdict.first_violation = {static_cast<int>(k), j};
                return verdict;
            }
        }
    }
    return verdict;
}

GapBoundResult gap_bound(const SubMarkovSystem& sys, const std::vector<Rational>& defect,
                         unsigned N, const Rational& delta0) {
    validate_system(sys);
    if (N == 0 || delta0 <= 0)
        throw std::invalid_argument("gap_bound: need N >= 1 and delta0 > 0");

    std::vector<int> support;
    for (int j = 0; j < sys.atoms; ++j)
        if (defect[j] != 0) support.push_back(j);

    if (!support.empty()) {
        const auto edges = out_edges(sys);
        const auto reachable = reachable_set(edges, support);
        for (int j = 0; j < sys.atoms; ++j)
            if (reachable[j] && sys.weights[j] < delta0)
                throw WeightBelowThreshold("gap_bound: reachable atom weight below delta0");
    }

    GapBoundResult result;
    result.gap = delta0 / N;

    const ClassicalOrbit orbit = classical_orbit(sys, defect, 0);
    for (const auto& a : orbit.orbit) {
        Rational tau = 0;
        for (int j = 0; j < sys.atoms; ++j) tau += a[j] * sys.weights[j];
        result.trace_values.push_back(tau);
    }
    result.gap_holds = true;
    for (const Rational& tau : result.trace_values)
        if (tau != 0 && tau < result.gap) result.gap_holds = false;

    Rational worst = 0;
    bool any_ratio = false;
    for (std::size_t k = 0; k + 1 < result.trace_values.size(); ++k) {
        if (result.trace_values[k] == 0) continue;
        any_ratio = true;
        const Rational ratio = result.trace_values[k + 1] / result.trace_values[k];
        worst = std::max(worst, ratio);
    }
    if (any_ratio && worst < 1) {
        result.contraction = worst;
        const double x0 = static_cast<double>(result.trace_values.front());
        const double c = static_cast<double>(worst);
        const double gap = static_cast<double>(result.gap);
        if (x0 > 0) {
            const int predicted =
                x0 < gap ? 1
                         : 1 + static_cast<int>(std::ceil(std::log(x0 / gap) / std::log(1.0 / c)));
            result.predicted_bound = predicted;
            result.bound_confirmed = orbit.stabilized && orbit.index <= predicted;
        }
    }
    return result;
}

namespace {

// Best rational approximation within tol by continued fractions.
std::optional<Rational> snap_rational(double x, double tol, long long max_den = 1000000) {
    if (std::abs(x) <= tol) return Rational(0);
    if (x < 0) return std::nullopt;
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = x;
    for (int iter = 0; iter < 64; ++iter) {
        const double floor_part = std::floor(frac);
        const long long a = static_cast<long long>(floor_part);
        const long long p2 = a * p1 + p0;
        const long long q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double approx = static_cast<double>(p1) / static_cast<double>(q1);
        if (std::abs(x - approx) <= tol) return Rational(p1, q1);
        const double rem = frac - floor_part;
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
    }
    return std::nullopt;
}

}  // namespace

ExpectationResult expectation_coefficients(const KrausMap& t, const Matrix& atom_basis,
                                           const Tolerances& tol) {
    if (atom_basis.rows() != t.dim || atom_basis.cols() != t.dim)
        throw AtomsNotPartition("expectation_coefficients: atom basis must be dim x dim");
    const Matrix gram = atom_basis.adjoint() * atom_basis;
    if ((gram - Matrix::Identity(t.dim, t.dim)).norm() > 1e-8)
        throw AtomsNotPartition("expectation_coefficients: atoms are not orthonormal");

    ExpectationResult result;
    result.coefficients.assign(t.dim, std::vector<double>(t.dim, 0.0));
    result.diagonal_preserved = true;

    for (int j = 0; j < t.dim; ++j) {
        const Matrix zj = atom_basis.col(j) * atom_basis.col(j).adjoint();
        const Matrix image = apply_map(t, zj);
        const Matrix in_basis = atom_basis.adjoint() * image * atom_basis;
        for (int i = 0; i < t.dim; ++i)
            result.coefficients[i][j] = in_basis(i, i).real();
        Matrix off = in_basis;
        off.diagonal().setZero();
        if (off.norm() > 1e-9 * (1.0 + in_basis.norm())) result.diagonal_preserved = false;
    }

    SubMarkovSystem snapped;
    snapped.atoms = t.dim;
    snapped.weights.assign(t.dim, Rational(1));
    snapped.coeffs.assign(t.dim, std::vector<Rational>(t.dim, Rational(0)));
    bool ok = true;
    for (int i = 0; i < t.dim && ok; ++i) {
        for (int j = 0; j < t.dim; ++j) {
            const auto q = snap_rational(result.coefficients[i][j], 1e-9);
            if (!q) {
                ok = false;
                break;
            }
            snapped.coeffs[i][j] = *q;
        }
    }
    if (ok) {
        for (int i = 0; i < t.dim; ++i) {
            Rational row = 0;
            for (int j = 0; j < t.dim; ++j) row += snapped.coeffs[i][j];
            if (row > 1) ok = false;
        }
    }
    if (ok) result.snapped = std::move(snapped);
    return result;
}

}  // namespace defectlab
