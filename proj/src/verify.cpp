#include "defectlab/verify.hpp"

#include "defectlab/analysis.hpp"
#include "defectlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace defectlab {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

Matrix random_psd(Rng& rng, int dim) {
    const Matrix g = rng.gaussian_matrix(dim, dim);
    Matrix p = g.adjoint() * g;
    return p / (1.0 + p.norm());
}

}  // namespace

Json suite_result_to_json(const SuiteResult& result) {
    return Json{{"suite", result.suite},
                {"checks", result.checks},
                {"failures", result.failures},
                {"passed", result.failures == 0},
                {"notes", result.notes}};
}

SuiteResult cocycle_suite(std::uint64_t seed, int pairs) {
    SuiteResult r;
    r.suite = "cocycle";
    for (int i = 0; i < pairs; ++i) {
        const int dim = 2 + (i % 5);
        const KrausMap t = random_subunital(dim, mix(seed, 2 * i));
        const KrausMap s = random_subunital(dim, mix(seed, 2 * i + 1));
        const Matrix id = Matrix::Identity(dim, dim);

        // d(T∘S) = d(T) + T(d(S))
        const Matrix lhs = defect(compose(t, s)).defect;
        const Matrix rhs = defect(t).defect + apply_map(t, defect(s).defect);
        r.check((lhs - rhs).norm() <= 1e-10,
                "sequential cocycle residual " + fmt((lhs - rhs).norm()) + " at pair " +
                    std::to_string(i));

        // CP positivity on a random PSD probe.
        Rng rng(mix(seed, 5000 + i));
        const Matrix probe = random_psd(rng, dim);
        r.check(min_eigenvalue(apply_map(t, probe)) >= -1e-9,
                "positivity violated at pair " + std::to_string(i));

        if (i % 10 == 0) {
            // Iterated cocycle: I - T^n(I) = Σ_{k<n} T^k(d) for n <= 12.
            Matrix unit_iter = id;
            Matrix partial = Matrix::Zero(dim, dim);
            Matrix term = defect(t).defect;
            bool ok = true;
            for (int n = 1; n <= 12; ++n) {
                unit_iter = apply_map(t, unit_iter);
                partial += term;
                term = apply_map(t, term);
                if (((id - unit_iter) - partial).norm() > 1e-9) ok = false;
            }
            r.check(ok, "iterated cocycle failed at pair " + std::to_string(i));

            // Monotone unit orbit for k <= 20.
            Matrix prev = id;
            bool monotone = true;
            for (int k = 0; k < 20; ++k) {
                const Matrix next = apply_map(t, prev);
                if (!psd_leq(next, prev, 1e-9)) monotone = false;
                prev = next;
            }
            r.check(monotone, "monotone orbit failed at pair " + std::to_string(i));
        }

        if (i % 20 == 0) {
            // Associativity of composition on a probe.
            const KrausMap left = compose(compose(t, s), t);
            const KrausMap right = compose(t, compose(s, t));
            const Matrix x = random_psd(rng, dim);
            r.check((apply_map(left, x) - apply_map(right, x)).norm() <= 1e-11,
                    "composition associativity failed at pair " + std::to_string(i));
        }
    }
    return r;
}

SuiteResult cp_bound_suite(std::uint64_t seed, int instances) {
    SuiteResult r;
    r.suite = "cp-bound";
    for (int i = 0; i < instances; ++i) {
        const int dim = 2 + (i % 7);
        const KrausMap t = random_flag_nilpotent(dim, mix(seed, i));
        const DefectOrbitReport report = defect_orbit(t);
        r.check(report.index.stabilized, "instance " + std::to_string(i) + " did not stabilize");
        if (!report.index.stabilized) continue;
        const int n = report.index.index;

        const Matrix q = orbit_support(report);
        const int s = tolerant_rank(q, Tolerances{}.rank);
        r.check(n <= s && s <= dim,
                "dimension bound violated at instance " + std::to_string(i) + ": n=" +
                    std::to_string(n) + " s=" + std::to_string(s));

        if (report.trivial_defect) continue;
        Matrix accumulated = Matrix::Zero(dim, dim);
        for (int k = 0; k < n; ++k) accumulated += report.orbit[k];
        const CornerData corner = corner_map(t, q, accumulated);
        const auto nil = nilpotency_index(corner.map);
        r.check(nil.has_value() && *nil == n,
                "corner nilpotency index mismatch at instance " + std::to_string(i));

        // Word kernels agree with the unit-orbit kernels on the corner.
        const auto word = word_kernel_dims(corner.map, corner.map.dim);
        const auto direct = unit_orbit_kernel_dims(corner.map, corner.map.dim);
        r.check(word == direct, "word kernel mismatch at instance " + std::to_string(i));

        if (nil) {
            const NilpotentType type = classify_nilpotent_type(corner.map);
            r.check(type.is_maximal == (n == s),
                    "maximal-type classification inconsistent at instance " + std::to_string(i));
        }
    }
    return r;
}

namespace {

void check_parallel_pair(SuiteResult& r, const KrausMap& t, const KrausMap& s,
                         const std::string& tag) {
    const Matrix u1 = Matrix::Identity(t.dim, t.dim);
    const Matrix u2 = Matrix::Identity(s.dim, s.dim);
    const KrausMap prod = tensor_map(t, s);

    const DefectData dt = defect(t);
    const DefectData ds = defect(s);
    const DefectData dp = defect(prod);

    // Success multiplicativity.
    r.check((dp.success - tensor(dt.success, ds.success)).norm() <= 1e-11,
            "success multiplicativity failed: " + tag);
    // d(T⊗S) = u ⊗ d(S) + d(T) ⊗ s(S)
    const Matrix form1 = tensor(u1, ds.defect) + tensor(dt.defect, ds.success);
    r.check((dp.defect - form1).norm() <= 1e-10, "parallel defect (mixed form) failed: " + tag);
    // d(T⊗S) = d(T) ⊗ u + u ⊗ d(S) - d(T) ⊗ d(S)
    const Matrix form2 = tensor(dt.defect, u2) + tensor(u1, ds.defect) -
                         tensor(dt.defect, ds.defect);
    r.check((dp.defect - form2).norm() <= 1e-10,
            "parallel defect (inclusion-exclusion) failed: " + tag);

    // Index bound.
    const DefectOrbitReport rt = defect_orbit(t);
    const DefectOrbitReport rs = defect_orbit(s);
    if (rt.index.stabilized && rs.index.stabilized) {
        const DefectOrbitReport rp = defect_orbit(prod);
        r.check(rp.index.stabilized, "tensor map did not stabilize: " + tag);
        if (rp.index.stabilized)
            r.check(rp.index.index <= std::max(rt.index.index, rs.index.index),
                    "parallel index bound violated: " + tag);
    }
}

}  // namespace

SuiteResult parallel_suite(std::uint64_t seed, int random_pairs) {
    SuiteResult r;
    r.suite = "parallel";
    for (int a = 2; a <= 4; ++a)
        for (int b = 2; b <= 4; ++b)
            check_parallel_pair(r, shift_channel(a), shift_channel(b),
                                "shift(" + std::to_string(a) + ")xshift(" + std::to_string(b) + ")");
    for (int i = 0; i < random_pairs; ++i) {
        const KrausMap t = random_flag_nilpotent(2 + (i % 2), mix(seed, 2 * i));
        const KrausMap s = random_flag_nilpotent(2 + ((i + 1) % 2), mix(seed, 2 * i + 1));
        check_parallel_pair(r, t, s, "random pair " + std::to_string(i));
    }
    return r;
}

namespace {

SubMarkovSystem system_from_pattern(int n, const std::vector<bool>& pattern, Rng& rng) {
    // Entries a_ij/16 with a_ij in 1..3: row sums <= 15/16 < 1 for n <= 5.
    SubMarkovSystem sys;
    sys.atoms = n;
    sys.weights.assign(n, Rational(1));
    sys.coeffs.assign(n, std::vector<Rational>(n, Rational(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (pattern[i * n + j]) sys.coeffs[i][j] = Rational(rng.uniform_int(1, 3), 16);
    return sys;
}

void check_digraph_system(SuiteResult& r, const SubMarkovSystem& sys, Rng& rng,
                          const std::string& tag) {
    const int n = sys.atoms;
    // Random nonempty defect support with entries c/16.
    std::vector<Rational> defect(n, Rational(0));
    std::vector<int> support;
    for (int j = 0; j < n; ++j) {
        if (rng.uniform() < 0.5) {
            defect[j] = Rational(rng.uniform_int(1, 16), 16);
            support.push_back(j);
        }
    }
    if (support.empty()) {
        const int j = rng.uniform_int(0, n - 1);
        defect[j] = Rational(rng.uniform_int(1, 16), 16);
        support.push_back(j);
    }

    const DigraphResult dg = digraph_height(sys, support);
    const ClassicalOrbit orbit = classical_orbit(sys, defect, 0);

    r.check(dg.finite == orbit.stabilized, "verdict mismatch: " + tag);
    if (dg.finite && orbit.stabilized)
        r.check(orbit.index == dg.height + 1,
                "index mismatch: " + tag + " digraph=" + std::to_string(dg.height + 1) +
                    " exact=" + std::to_string(orbit.index));

    // Support recursion: supp(orbit[k]) equals the k-step reachability set.
    std::set<int> cur(support.begin(), support.end());
    for (std::size_t k = 0; k < orbit.orbit.size(); ++k) {
        std::set<int> observed;
        for (int j = 0; j < n; ++j)
            if (orbit.orbit[k][j] != 0) observed.insert(j);
        if (k > 0) {
            std::set<int> next;
            for (int j : cur)
                for (int i = 0; i < n; ++i)
                    if (sys.coeffs[i][j] > 0) next.insert(i);
            cur = next;
        }
        if (observed != cur) {
            r.check(false, "support recursion mismatch: " + tag + " at step " + std::to_string(k));
            return;
        }
    }
    r.check(true, "");
}

}  // namespace

SuiteResult digraph_suite(std::uint64_t seed, int random_per_n) {
    SuiteResult r;
    r.suite = "digraph";
    // Exhaustive zero-patterns for n <= 3.
    for (int n = 1; n <= 3; ++n) {
        const int cells = n * n;
        for (int mask = 0; mask < (1 << cells); ++mask) {
            std::vector<bool> pattern(cells);
            for (int c = 0; c < cells; ++c) pattern[c] = (mask >> c) & 1;
            Rng rng(mix(seed, 1000000ULL * n + mask));
            const SubMarkovSystem sys = system_from_pattern(n, pattern, rng);
            check_digraph_system(r, sys, rng,
                                 "n=" + std::to_string(n) + " mask=" + std::to_string(mask));
        }
    }
    // Random patterns for n = 4, 5.
    for (int n = 4; n <= 5; ++n) {
        for (int i = 0; i < random_per_n; ++i) {
            Rng rng(mix(seed, 2000000ULL * n + i));
            std::vector<bool> pattern(n * n);
            for (std::size_t c = 0; c < pattern.size(); ++c) pattern[c] = rng.uniform() < 0.3;
            const SubMarkovSystem sys = system_from_pattern(n, pattern, rng);
            check_digraph_system(r, sys, rng,
                                 "n=" + std::to_string(n) + " random " + std::to_string(i));
        }
    }
    return r;
}

SuiteResult faithfulness_suite(std::uint64_t seed, int probes_per_instance) {
    SuiteResult r;
    r.suite = "faithfulness";

    // Shift conjunction: finite semigroup, no subharmonic projection, not unital.
    for (int d = 2; d <= 6; ++d) {
        const KrausMap t = shift_channel(d);
        const SubharmonicReport sub = subharmonic_analysis(t);
        r.check(sub.nilpotent_excludes_all && !sub.found_subharmonic,
                "shift(" + std::to_string(d) + ") subharmonic exclusion failed");
        const UnitalityReport u = unitality_verdict(t);
        r.check(!u.is_unital && u.stabilized && !u.corner_faithful && u.verdict_consistent,
                "shift(" + std::to_string(d) + ") unitality profile wrong");
        r.check(std::abs(defect(t).defect.norm() - 1.0) <= 1e-12,
                "shift(" + std::to_string(d) + ") defect norm is not 1");
        r.check(u.common_kernel_dim_on_q == 1,
                "shift(" + std::to_string(d) + ") common kernel dimension wrong");
    }

    // Hierarchy: stabilized and non-unital forces non-corner-faithful;
    // unital instances are always consistent.
    for (int i = 0; i < 40; ++i) {
        const int dim = 2 + (i % 4);
        const KrausMap t = random_flag_nilpotent(dim, mix(seed, i));
        const UnitalityReport u = unitality_verdict(t);
        r.check(u.verdict_consistent, "hierarchy violated at flag instance " + std::to_string(i));
        if (u.stabilized && !u.is_unital)
            r.check(!u.corner_faithful,
                    "stabilized non-unital but corner-faithful at instance " + std::to_string(i));
    }
    for (int i = 0; i < 20; ++i) {
        const int dim = 2 + (i % 4);
        const KrausMap t = random_unital(dim, mix(seed, 100 + i));
        const UnitalityReport u = unitality_verdict(t);
        r.check(u.is_unital && u.verdict_consistent,
                "random unital instance " + std::to_string(i) + " not detected unital");
        const CornerIrreducibleVerdict v = corner_irreducible_unitality(t);
        r.check(v.inconclusive || v.unital,
                "corner irreducibility contradicts unitality at instance " + std::to_string(i));
    }

    // Projection-faithfulness: T(vv†) = 0 iff v lies in the common kernel
    // of the adjoint Kraus family, for probes in range(Q).
    for (int d = 2; d <= 5; ++d) {
        const KrausMap t = shift_channel(d);
        const DefectOrbitReport report = defect_orbit(t);
        const Matrix q = orbit_support(report);
        const Matrix basis = orthonormal_span(q, 1e-9);
        Rng rng(mix(seed, 200 + d));
        bool ok = true;
        for (int p = 0; p < probes_per_instance; ++p) {
            CVector v = CVector::Zero(d);
            if (p % 5 == 0) {
                v(d - 1) = 1.0;  // the common kernel direction
            } else {
                for (int c = 0; c < basis.cols(); ++c) v += rng.cgauss() * basis.col(c);
                v.normalize();
            }
            const Matrix probe = v * v.adjoint();
            const bool image_zero = apply_map(t, probe).norm() <= 1e-10;
            bool kernel = true;
            for (const Matrix& k : t.kraus)
                if ((k.adjoint() * v).norm() > 1e-8) kernel = false;
            if (image_zero != kernel) ok = false;
        }
        r.check(ok, "projection-faithfulness probe mismatch for shift(" + std::to_string(d) + ")");
    }

    // Common invariant functional.
    {
        std::vector<KrausMap> unitaries;
        Rng rng(mix(seed, 300));
        for (int i = 0; i < 3; ++i) {
            KrausMap u;
            u.dim = 3;
            u.kraus.push_back(rng.random_unitary(3));
            unitaries.push_back(u);
        }
        const InvariantFunctionalVerdict v =
            common_invariant_functional(unitaries, Matrix::Identity(3, 3));
        r.check(v.all_invariant && v.all_unital, "unitary family should be invariant and unital");

        std::vector<KrausMap> with_shift = unitaries;
        with_shift.push_back(shift_channel(3));
        const InvariantFunctionalVerdict w =
            common_invariant_functional(with_shift, Matrix::Identity(3, 3));
        r.check(!w.all_invariant, "family containing the shift should fail invariance");
    }

    // Subharmonic search on non-nilpotent instances.
    {
        KrausMap id2 = identity_channel(2);
        const SubharmonicReport sub = subharmonic_analysis(id2);
        r.check(sub.found_subharmonic.has_value(),
                "identity channel should have a subharmonic projection");

        // Single diagonal Kraus preserving the first coordinate.
        KrausMap block;
        block.dim = 2;
        Matrix v = Matrix::Zero(2, 2);
        v(0, 0) = 1.0;
        v(1, 1) = 0.6;
        block.kraus.push_back(v);
        const SubharmonicReport sub2 = subharmonic_analysis(block);
        bool found_e0 = false;
        if (sub2.found_subharmonic) {
            Matrix p = *sub2.found_subharmonic;
            Matrix e0 = Matrix::Zero(2, 2);
            e0(0, 0) = 1.0;
            found_e0 = (p - e0).norm() <= 1e-8 || psd_leq(e0, p, 1e-8);
        }
        r.check(found_e0, "block channel should expose the preserved projection");
    }

    // Corner irreducibility hypotheses.
    {
        Rng rng(mix(seed, 400));
        KrausMap unitary;
        unitary.dim = 3;
        unitary.kraus.push_back(rng.random_unitary(3));
        const CornerIrreducibleVerdict v = corner_irreducible_unitality(unitary);
        r.check(v.unital && !v.inconclusive, "unitary channel should be confirmed unital");

        bool threw = false;
        try {
            corner_irreducible_unitality(shift_channel(3));
        } catch (const HypothesesNotMet&) {
            threw = true;
        }
        r.check(threw, "shift should fail the corner-irreducibility hypotheses");
    }
    return r;
}

SuiteResult abstract_suite(std::uint64_t seed, int instances) {
    SuiteResult r;
    r.suite = "abstract";

    // Random 0/1 sub-permutation dynamics on Z^n: the unit orbit lives on
    // 0/1 vectors, so repetition is guaranteed and annihilation is exact.
    for (int i = 0; i < instances; ++i) {
        const int n = 2 + (i % 5);
        Rng rng(mix(seed, i));
        std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
        for (int row = 0; row < n; ++row)
            if (rng.uniform() < 0.7) m[row][rng.uniform_int(0, n - 1)] = 1;

        IntVectorSpace space{n};
        auto map = [m, n](const IntVectorSpace::Element& x) {
            IntVectorSpace::Element out(n, 0);
            for (int row = 0; row < n; ++row)
                for (int col = 0; col < n; ++col)
                    if (m[row][col]) out[row] += x[col];
            return out;
        };
        const auto result = generic_stabilize<IntVectorSpace>(space, map, (1 << n) + 4);
        r.check(result.outcome == GenericOutcome::Stabilized,
                "int instance " + std::to_string(i) + " did not stabilize");
        if (result.outcome != GenericOutcome::Stabilized) continue;

        // Repetition lemma conclusion, rechecked directly and minimally.
        auto d = space.subtract(space.unit(), map(space.unit()));
        auto cur = d;
        for (int k = 1; k <= result.index; ++k) {
            cur = map(cur);
            const bool is_zero = space.equal(cur, space.zero());
            if (k < result.index)
                r.check(!is_zero, "index not minimal at instance " + std::to_string(i));
            else
                r.check(is_zero, "defect orbit nonzero at the index, instance " + std::to_string(i));
        }

        // Exact agreement with the classical module.
        SubMarkovSystem sys;
        sys.atoms = n;
        sys.weights.assign(n, Rational(1));
        sys.coeffs.assign(n, std::vector<Rational>(n, Rational(0)));
        for (int row = 0; row < n; ++row)
            for (int col = 0; col < n; ++col)
                if (m[row][col]) sys.coeffs[row][col] = 1;
        const ClassicalOrbit orbit = classical_orbit(sys, system_defect(sys), 0);
        r.check(orbit.stabilized && orbit.index == result.index,
                "classical module disagrees at instance " + std::to_string(i));

        // Telescoping identity, exact.
        for (int p = 1; p <= 4; ++p) {
            const auto residual = telescoping_check<IntVectorSpace>(space, map, p);
            r.check(space.equal(residual, space.zero()),
                    "telescoping residual nonzero at instance " + std::to_string(i));
        }
    }

    // Coordinate projection on Z^3: drop the last coordinate.
    {
        IntVectorSpace space{3};
        auto map = [](const IntVectorSpace::Element& x) {
            return IntVectorSpace::Element{x[0], x[1], 0};
        };
        const auto result = generic_stabilize<IntVectorSpace>(space, map, 16);
        r.check(result.outcome == GenericOutcome::Stabilized && result.index == 1,
                "coordinate projection should stabilize at 1");
    }

    // Rational chain: matches the classical chain index 3.
    {
        RationalVectorSpace space{3};
        auto map = [](const RationalVectorSpace::Element& x) {
            return RationalVectorSpace::Element{Rational(0), x[0], x[1]};
        };
        const auto result = generic_stabilize<RationalVectorSpace>(space, map, 16);
        r.check(result.outcome == GenericOutcome::Stabilized && result.index == 3,
                "rational chain should stabilize at 3");
        const auto props = check_map_properties<RationalVectorSpace>(
            space, map,
            {space.zero(), space.unit(), {Rational(1), Rational(0), Rational(2)}});
        r.check(props.additive && props.monotone && props.subunital,
                "chain map properties failed");
    }

    // Unital map (identity): trivial defect.
    {
        IntVectorSpace space{2};
        auto map = [](const IntVectorSpace::Element& x) { return x; };
        const auto result = generic_stabilize<IntVectorSpace>(space, map, 8);
        r.check(result.outcome == GenericOutcome::Stabilized && result.index == 1,
                "identity map should stabilize at 1 with zero defect");
    }

    // Half-plane preorder: the swap map cycles; the repetition happens but
    // annihilation fails, exposing the pointedness hypothesis.
    {
        HalfPlaneSpace space;
        auto swap = [](const HalfPlaneSpace::Element& x) {
            return HalfPlaneSpace::Element{x[1], x[0]};
        };
        const auto result = generic_stabilize<HalfPlaneSpace>(space, swap, 16);
        r.check(result.outcome == GenericOutcome::RepetitionWithoutAnnihilation,
                "half-plane swap must not be reported stabilized");

        using E = HalfPlaneSpace::Element;
        const std::vector<E> samples{{E{1, -1}, E{-1, 1}, E{1, 0}, E{0, 0}}};
        const auto cancel = cancellation_check<HalfPlaneSpace>(space, samples);
        r.check(!cancel.pointed_on_samples,
                "half-plane cone must fail the cancellation check");
    }

    // Standard cone on Z^2 passes cancellation on random samples.
    {
        IntVectorSpace space{2};
        Rng rng(mix(seed, 999));
        std::vector<IntVectorSpace::Element> samples;
        for (int i = 0; i < 50; ++i) {
            samples.push_back(
                {boost::multiprecision::cpp_int(rng.uniform_int(-5, 5)),
                 boost::multiprecision::cpp_int(rng.uniform_int(-5, 5))});
        }
        samples.push_back(space.zero());
        const auto cancel = cancellation_check<IntVectorSpace>(space, samples);
        r.check(cancel.pointed_on_samples, "standard cone wrongly failed cancellation");
    }
    return r;
}

SuiteResult certificates_suite(std::uint64_t seed, int pairs) {
    SuiteResult r;
    r.suite = "certificates";

    auto check_agreement = [&](const KrausMap& t, const FiltrationCertificate& cert,
                               const std::string& tag, std::optional<bool> expect_holds) {
        const FiltrationVerdict fv = verify_filtration(t, cert);
        const KrausLoweringVerdict kv = kraus_level_lowering(t, cert);
        r.check(fv.holds == kv.holds, "route verdicts disagree: " + tag);
        if (expect_holds) r.check(fv.holds == *expect_holds, "unexpected verdict: " + tag);
        if (fv.holds) {
            // A holding certificate bounds the measured index.
            const DefectOrbitReport report = defect_orbit(t);
            if (report.index.stabilized && fv.implied_bound)
                r.check(report.index.index <= *fv.implied_bound,
                        "implied bound below measured index: " + tag);
        }
    };

    int produced = 0;
    for (int i = 0; produced < pairs; ++i) {
        const int kind = i % 4;
        Rng rng(mix(seed, 10000 + i));
        if (kind == 0) {
            const int d = 2 + (i % 5);
            const KrausMap t = shift_channel(d);
            const auto cert = find_flag(t);
            r.check(cert.has_value() && cert->claimed_bound == d,
                    "shift flag should exist with bound d");
            if (cert) check_agreement(t, *cert, "shift exact " + std::to_string(d), true);
            ++produced;
        } else if (kind == 1) {
            const int d = 2 + (i % 4);
            const KrausMap t = random_flag_nilpotent(d, mix(seed, 20000 + i));
            const auto cert = find_flag(t);
            if (!cert) {
                r.check(false, "flag instance lacks a certificate at " + std::to_string(i));
                ++produced;
                continue;
            }
            check_agreement(t, *cert, "flag exact " + std::to_string(i), true);
            ++produced;
        } else if (kind == 2) {
            // Conjugate a valid flag by a small unitary: chain stays valid,
            // level lowering breaks.
            const int d = 3 + (i % 3);
            const KrausMap t = shift_channel(d);
            auto cert = find_flag(t);
            if (!cert) continue;
            const double angle = (i % 3 == 0) ? 0.1 : (i % 3 == 1 ? 0.03 : 0.01);
            Matrix rot = Matrix::Identity(d, d);
            rot(0, 0) = std::cos(angle);
            rot(0, 1) = -std::sin(angle);
            rot(1, 0) = std::sin(angle);
            rot(1, 1) = std::cos(angle);
            for (Matrix& p : cert->projections) p = hermitize(rot * p * rot.adjoint());
            check_agreement(t, *cert, "rotated flag " + std::to_string(i), false);
            ++produced;
        } else {
            // Identity channel against a nontrivial filtration: fails at k=1.
            const int d = 2 + (i % 4);
            const KrausMap t = identity_channel(d);
            const auto cert = find_flag(shift_channel(d));
            if (!cert) continue;
            check_agreement(t, *cert, "identity vs shift flag " + std::to_string(i), false);
            ++produced;
        }
    }

    // Single-projection certificate for a one-step annihilator.
    {
        KrausMap t;
        t.dim = 2;
        Matrix v = Matrix::Zero(2, 2);
        v(0, 0) = 1.0;
        t.kraus.push_back(v);
        FiltrationCertificate cert;
        cert.projections.push_back(Matrix::Zero(2, 2));
        Matrix p = Matrix::Zero(2, 2);
        p(1, 1) = 1.0;
        cert.projections.push_back(p);
        cert.claimed_bound = 1;
        check_agreement(t, cert, "one-step annihilator", true);
    }
    return r;
}

SuiteResult scalar_suite(std::uint64_t seed, int sims) {
    SuiteResult r;
    r.suite = "scalar";
    for (int i = 0; i < sims; ++i) {
        Rng rng(mix(seed, i));
        const double delta = rng.uniform(0.01, 0.5);
        const double eps = (i % 3 == 0) ? 0.0 : rng.uniform(0.0, 0.45 * delta);
        const double c = rng.uniform(0.05, 0.95);
        const double x0 = rng.uniform(delta, 10.0);

        // Quantized contraction: snap down to the lattice, jitter nonzero
        // readings by at most eps, keep x_{k+1} <= c * x_k.
        std::vector<double> xs;
        double x = delta * std::round(x0 / delta);
        if (x <= 0) x = delta;
        xs.push_back(x);
        for (int k = 0; k < 200 && xs.size() < 64; ++k) {
            const double target = c * xs.back();
            const double lattice = delta * std::floor(target / delta);
            double next;
            if (lattice <= 0) {
                next = 0.0;
            } else {
                const double lo = std::max(lattice - eps, 0.0);
                const double hi = std::min(lattice + eps, target);
                next = lo + (hi - lo) * rng.uniform();
            }
            xs.push_back(next);
            if (next == 0.0) break;
        }
        // Pad with exact zeros.
        while (xs.size() < 16) xs.push_back(0.0);

        // Dichotomy: every value is 0 or >= delta - eps.
        bool dichotomy = true;
        for (double v : xs)
            if (v != 0.0 && v < delta - eps - 1e-12) dichotomy = false;
        r.check(dichotomy, "dichotomy violated at sim " + std::to_string(i));

        // Witness acceptance, only meaningful when eps < delta/2.
        DiscretenessWitness witness;
        witness.delta = delta;
        witness.epsilon = std::min(eps, 0.49 * delta);
        witness.lattice.is_grid = true;
        witness.lattice.grid_delta = delta;
        const QuantizationVerdict qv = approx_quantization_check(xs, witness);
        r.check(qv.holds, "quantization check failed at sim " + std::to_string(i));

        // Hit exact zero no later than the discrete-contraction formula.
        const int bound = contraction_discrete_bound(xs.front(), c, delta);
        bool zero_from_bound = true;
        for (std::size_t k = static_cast<std::size_t>(bound); k < xs.size(); ++k)
            if (xs[k] != 0.0) zero_from_bound = false;
        r.check(zero_from_bound, "formula bound missed at sim " + std::to_string(i));

        // The robustness route: c^k x0 < delta/2 forces x_k = 0.
        bool robustness = true;
        double scale = xs.front();
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (scale < delta / 2.0 && xs[k] != 0.0) robustness = false;
            scale *= c;
        }
        r.check(robustness, "robustness bound missed at sim " + std::to_string(i));
    }
    return r;
}

SuiteResult asymptotic_suite(std::uint64_t seed) {
    SuiteResult r;
    r.suite = "asymptotic";

    for (double c : {0.3, 0.5, 0.9}) {
        const KrausMap t = dephasing_decay(c);
        const AsymptoticDefect ad = asymptotic_defect(t);
        r.check(ad.convergent, "dephasing(" + fmt(c) + ") should converge");
        if (!ad.convergent) continue;
        Matrix expected = Matrix::Zero(2, 2);
        expected(1, 1) = 1.0;
        r.check((ad.d_inf - expected).norm() <= 1e-10,
                "dephasing(" + fmt(c) + ") asymptotic defect wrong");
        r.check(ad.residual <= 1e-8, "dephasing(" + fmt(c) + ") fixed point residual too large");
        r.check(std::abs(ad.spectral_radius - c) <= 1e-9,
                "dephasing(" + fmt(c) + ") spectral radius wrong");
    }

    for (int d = 2; d <= 6; ++d) {
        const KrausMap t = shift_channel(d);
        const AsymptoticDefect ad = asymptotic_defect(t);
        r.check(ad.convergent && ad.spectral_radius <= 1e-8,
                "shift(" + std::to_string(d) + ") restriction should be nilpotent");
        if (!ad.convergent) continue;
        r.check((ad.d_inf - Matrix::Identity(d, d)).norm() <= 1e-9,
                "shift(" + std::to_string(d) + ") asymptotic defect should be the identity");
        const TailEstimate tail = tail_estimate(t, ad, d);
        r.check(tail.observed <= 1e-9, "shift(" + std::to_string(d) + ") tail should vanish");
    }

    // Stabilized random instances: d_inf equals the finite orbit sum.
    for (int i = 0; i < 20; ++i) {
        const int dim = 2 + (i % 4);
        const KrausMap t = random_flag_nilpotent(dim, mix(seed, i));
        const DefectOrbitReport report = defect_orbit(t);
        if (!report.index.stabilized) continue;
        const AsymptoticDefect ad = asymptotic_defect(t);
        r.check(ad.convergent, "flag instance " + std::to_string(i) + " should converge");
        if (!ad.convergent) continue;
        Matrix partial = Matrix::Zero(dim, dim);
        for (int k = 0; k < report.index.index; ++k) partial += report.orbit[k];
        r.check((ad.d_inf - partial).norm() <= 1e-9,
                "finite orbit sum mismatch at instance " + std::to_string(i));
        r.check(ad.residual <= 1e-8, "fixed point residual too large at " + std::to_string(i));
    }

    // Convergent random instances: fixed-point residual only.
    for (int i = 0; i < 20; ++i) {
        const int dim = 2 + (i % 3);
        const KrausMap t = random_subunital(dim, mix(seed, 100 + i));
        const AsymptoticDefect ad = asymptotic_defect(t);
        if (!ad.convergent) continue;
        r.check(ad.residual <= 1e-8,
                "random instance " + std::to_string(i) + " residual " + fmt(ad.residual));
    }

    // Unital: zero asymptotic defect.
    {
        const KrausMap t = random_unital(3, mix(seed, 500));
        const AsymptoticDefect ad = asymptotic_defect(t);
        r.check(ad.convergent && ad.d_inf.norm() <= 1e-8, "unital asymptotic defect should vanish");
    }

    // Geometric tail for the dephasing map: observed tail = 0.5^n exactly.
    {
        const KrausMap t = dephasing_decay(0.5);
        const AsymptoticDefect ad = asymptotic_defect(t);
        const TailEstimate tail = tail_estimate(t, ad, 10);
        r.check(std::abs(tail.observed - std::pow(0.5, 10)) <= 1e-12,
                "dephasing tail at n=10 should be 0.5^10");
        r.check(tail.jordan_block == 1, "dephasing restriction should be diagonalizable");
        r.check(tail.observed <= tail.bound + 1e-12, "dephasing tail exceeds the rate bound");
    }

    // Diagonal pinching decay: normal restriction, pure exponential bound.
    {
        KrausMap t;
        t.dim = 3;
        const double probs[3] = {0.7, 0.35, 0.2};
        for (int i = 0; i < 3; ++i) {
            Matrix v = Matrix::Zero(3, 3);
            v(i, i) = std::sqrt(probs[i]);
            t.kraus.push_back(v);
        }
        const AsymptoticDefect ad = asymptotic_defect(t);
        r.check(ad.convergent && std::abs(ad.spectral_radius - 0.7) <= 1e-9,
                "pinching decay spectral radius should be 0.7");
        const TailEstimate tail = tail_estimate(t, ad, 6);
        r.check(tail.jordan_block == 1, "pinching decay restriction should be diagonalizable");
        bool bounded = true;
        for (int n = 1; n <= 10; ++n) {
            const TailEstimate te = tail_estimate(t, ad, n);
            if (te.observed > te.bound * (1.0 + 1e-9) + 1e-12) bounded = false;
        }
        r.check(bounded, "pinching decay tail exceeds the rate bound");
    }
    return r;
}

SuiteResult instruments_suite(std::uint64_t seed, int instances) {
    SuiteResult r;
    r.suite = "instruments";

    // The noncommuting qubit pair.
    {
        const KrausMap t = qubit_noncommuting_povm();
        const Matrix sum = apply_map(t, Matrix::Identity(2, 2));
        const EigH eig = eig_hermitian(sum);
        r.check(std::abs(eig.values(0) - 1.0) <= 1e-12 &&
                    std::abs(eig.values(1) - 1.0 / 6.0) <= 1e-12,
                "qubit effect sum eigenvalues should be (1, 1/6)");
        const DefectData dd = defect(t);
        r.check(tolerant_rank(dd.defect, 1e-9) == 1, "qubit defect should have rank 1");
        const EigH deig = eig_hermitian(dd.defect);
        r.check(std::abs(deig.values(0) - 5.0 / 6.0) <= 1e-12 &&
                    std::abs(deig.values(1)) <= 1e-12,
                "qubit defect eigenvalues should be (5/6, 0)");
        const std::vector<Matrix> reach = reachability(t, 1);
        r.check(reach[1].cols() == 2, "one-step reachability should fill the qubit space");
        const Matrix q = reachability_closure(t);
        r.check(tolerant_rank(q, 1e-9) == 2, "qubit orbit corner should have rank 2");
    }

    // Commuting instruments: stationary reachability and minimal corner.
    for (int i = 0; i < instances; ++i) {
        const int dim = 2 + (i % 5);
        const KrausMap t = random_commuting_instrument(dim, mix(seed, i));
        const DefectData dd = defect(t);
        const int defect_rank = tolerant_rank(dd.defect, 1e-9);
        if (defect_rank == 0) {
            r.check(true, "");
            continue;
        }
        const std::vector<Matrix> reach = reachability(t, dim);
        bool stationary = true;
        const Matrix p0 = reach[0] * reach[0].adjoint();
        for (std::size_t k = 1; k < reach.size(); ++k) {
            if (reach[k].cols() != reach[0].cols()) stationary = false;
            const Matrix pk = reach[k] * reach[k].adjoint();
            if ((pk - p0).norm() > 1e-7) stationary = false;
        }
        r.check(stationary, "commuting instrument " + std::to_string(i) +
                                " reachability should be stationary");
        const Matrix q = reachability_closure(t);
        r.check(tolerant_rank(q, 1e-9) == defect_rank,
                "commuting instrument " + std::to_string(i) + " corner should equal defect rank");
    }
    return r;
}

SuiteResult shift_suite() {
    SuiteResult r;
    r.suite = "shift";
    for (int d = 2; d <= 8; ++d) {
        const KrausMap t = shift_channel(d);
        const DefectOrbitReport report = defect_orbit(t);
        r.check(report.index.stabilized && report.index.index == d,
                "shift(" + std::to_string(d) + ") index should be exactly d");
        bool orbit_ok = true;
        for (int k = 0; k < d; ++k) {
            Matrix expected = Matrix::Zero(d, d);
            expected(k, k) = 1.0;
            if ((report.orbit[k] - expected).norm() > 1e-12) orbit_ok = false;
        }
        r.check(orbit_ok, "shift(" + std::to_string(d) + ") orbit should walk the basis");

        const Matrix q = orbit_support(report);
        r.check(tolerant_rank(q, 1e-9) == d, "shift(" + std::to_string(d) + ") corner rank");

        Matrix accumulated = Matrix::Zero(d, d);
        for (int k = 0; k < d; ++k) accumulated += report.orbit[k];
        const CornerData corner = corner_map(t, q, accumulated);
        const NilpotentType type = classify_nilpotent_type(corner.map);
        r.check(type.is_maximal, "shift(" + std::to_string(d) + ") type should be maximal");
        bool ranks_ok = static_cast<int>(type.rank_sequence.size()) == d + 1;
        for (int k = 0; ranks_ok && k <= d; ++k)
            if (type.rank_sequence[k] != d - k) ranks_ok = false;
        r.check(ranks_ok, "shift(" + std::to_string(d) + ") rank sequence should step down by 1");
    }
    return r;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, const std::string& scale) {
    const bool desk = scale != "smoke";
    if (scale != "desk" && scale != "smoke")
        throw UnknownSuite("unknown scale '" + scale + "' (expected desk or smoke)");

    if (name == "cocycle") return cocycle_suite(seed, desk ? 1000 : 100);
    if (name == "cp-bound") return cp_bound_suite(seed, desk ? 500 : 50);
    if (name == "parallel") return parallel_suite(seed, desk ? 50 : 10);
    if (name == "digraph") return digraph_suite(seed, desk ? 1000 : 100);
    if (name == "faithfulness") return faithfulness_suite(seed, desk ? 500 : 50);
    if (name == "abstract") return abstract_suite(seed, desk ? 200 : 40);
    if (name == "certificates") return certificates_suite(seed, desk ? 200 : 40);
    if (name == "scalar") return scalar_suite(seed, desk ? 500 : 100);
    if (name == "asymptotic") return asymptotic_suite(seed);
    if (name == "instruments") return instruments_suite(seed, desk ? 100 : 20);
    if (name == "shift") return shift_suite();
    if (name == "all") {
        SuiteResult all;
        all.suite = "all";
        for (const char* sub : {"shift", "cocycle", "cp-bound", "parallel", "digraph",
                                "faithfulness", "abstract", "certificates", "scalar",
                                "asymptotic", "instruments"})
            all.absorb(run_suite(sub, seed, scale));
        return all;
    }
    throw UnknownSuite("unknown suite '" + name + "'");
}

}  // namespace defectlab
