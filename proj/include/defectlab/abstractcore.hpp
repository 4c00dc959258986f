// abstractcore.hpp — Exact ordered abelian groups with a distinguished unit:
// the generic stabilize-by-repetition engine, pointed-cone cancellation
// checks and telescoping identities. Instances are exact (integer/rational);
// float-backed effect spaces live in the channel/stabilization modules.

#pragma once

#include "defectlab/classical.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace defectlab {

// An instance needs: add, subtract, exact equality, cone membership, unit,
// zero, and a canonical key for exact repetition detection. No scalar
// multiplication is required.
template <typename S>
concept EffectSpaceInstance = requires(const S s, const typename S::Element& x,
                                       const typename S::Element& y) {
    { s.zero() } -> std::convertible_to<typename S::Element>;
    { s.unit() } -> std::convertible_to<typename S::Element>;
    { s.add(x, y) } -> std::convertible_to<typename S::Element>;
    { s.subtract(x, y) } -> std::convertible_to<typename S::Element>;
    { s.equal(x, y) } -> std::convertible_to<bool>;
    { s.in_cone(x) } -> std::convertible_to<bool>;
    { s.key(x) } -> std::convertible_to<std::string>;
};

// Z^n with componentwise order (pointed cone) and unit (1,...,1).
struct IntVectorSpace {
    using Element = std::vector<boost::multiprecision::cpp_int>;
    int n = 0;

    Element zero() const { return Element(n, 0); }
    Element unit() const { return Element(n, 1); }
    Element add(const Element& a, const Element& b) const {
        Element out(n);
        for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
        return out;
    }
    Element subtract(const Element& a, const Element& b) const {
        Element out(n);
        for (int i = 0; i < n; ++i) out[i] = a[i] - b[i];
        return out;
    }
    bool equal(const Element& a, const Element& b) const { return a == b; }
    bool in_cone(const Element& a) const {
        for (const auto& x : a)
            if (x < 0) return false;
        return true;
    }
    bool leq(const Element& a, const Element& b) const { return in_cone(subtract(b, a)); }
    std::string key(const Element& a) const {
        std::ostringstream os;
        for (const auto& x : a) os << x << ",";
        return os.str();
    }
};

// Q^n with componentwise order (pointed cone) and unit (1,...,1).
struct RationalVectorSpace {
    using Element = std::vector<Rational>;
    int n = 0;

    Element zero() const { return Element(n, Rational(0)); }
    Element unit() const { return Element(n, Rational(1)); }
    Element add(const Element& a, const Element& b) const {
        Element out(n);
        for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
        return out;
    }
    Element subtract(const Element& a, const Element& b) const {
        Element out(n);
        for (int i = 0; i < n; ++i) out[i] = a[i] - b[i];
        return out;
    }
    bool equal(const Element& a, const Element& b) const { return a == b; }
    bool in_cone(const Element& a) const {
        for (const auto& x : a)
            if (x < 0) return false;
        return true;
    }
    bool leq(const Element& a, const Element& b) const { return in_cone(subtract(b, a)); }
    std::string key(const Element& a) const {
        std::ostringstream os;
        for (const auto& x : a) os << rational_to_string(x) << ",";
        return os.str();
    }
};

// Z² with the non-pointed half-plane cone {(x,y) : x + y >= 0}. The induced
// order is a genuine preorder: (1,-1) and (-1,1) are both positive and sum
// to zero without either vanishing.
struct HalfPlaneSpace {
    using Element = std::array<boost::multiprecision::cpp_int, 2>;

    Element zero() const { return {0, 0}; }
    Element unit() const { return {1, 0}; }
    Element add(const Element& a, const Element& b) const { return {a[0] + b[0], a[1] + b[1]}; }
    Element subtract(const Element& a, const Element& b) const {
        return {a[0] - b[0], a[1] - b[1]};
    }
    bool equal(const Element& a, const Element& b) const { return a == b; }
    bool in_cone(const Element& a) const { return a[0] + a[1] >= 0; }
    bool leq(const Element& a, const Element& b) const { return in_cone(subtract(b, a)); }
    std::string key(const Element& a) const {
        std::ostringstream os;
        os << a[0] << "," << a[1];
        return os.str();
    }
};

enum class GenericOutcome {
    Stabilized,
    OrbitOpen,
    RepetitionWithoutAnnihilation,  // only possible over non-pointed cones
};

template <typename Element>
struct GenericStabilization {
    GenericOutcome outcome = GenericOutcome::OrbitOpen;
    int index = 0;     // minimal n >= 1 with T^n(d) = 0 when stabilized
    int repeat_n = 0;  // first exact repetition T^m(u) = T^n(u)
    int repeat_m = 0;
    std::optional<Element> failure_witness;  // nonzero T^{n+k}(d) on failure
};

// Iterates the unit orbit to the first exact repetition T^m(u) = T^n(u),
// then verifies T^{n+k}(d) = 0 exactly for k < m - n. Over a pointed cone
// the verification cannot fail; over a preorder it can, and the engine
// reports the witness instead of claiming stabilization.
template <EffectSpaceInstance S>
GenericStabilization<typename S::Element> generic_stabilize(
    const S& space, const std::function<typename S::Element(const typename S::Element&)>& map,
    int max_iter = 256) {
    using Element = typename S::Element;
    GenericStabilization<Element> result;

    const Element u = space.unit();
    const Element d = space.subtract(u, map(u));

    std::map<std::string, int> seen;
    Element cur = u;
    int repeat_n = -1, repeat_m = -1;
    for (int k = 0; k <= max_iter; ++k) {
        const std::string key = space.key(cur);
        const auto it = seen.find(key);
        if (it != seen.end()) {
            repeat_n = it->second;
            repeat_m = k;
            if (repeat_n == 0) {
                // T^k(u) = u shifts to the valid pair T^{k+1}(u) = T^1(u).
                repeat_n = 1;
                repeat_m = k + 1;
            }
            break;
        }
        seen.emplace(key, k);
        cur = map(cur);
    }
    if (repeat_n < 0) return result;  // OrbitOpen

    result.repeat_n = repeat_n;
    result.repeat_m = repeat_m;

    // Exact defect orbit up to the repetition window.
    std::vector<Element> orbit{d};
    for (int k = 0; k < repeat_m; ++k) orbit.push_back(map(orbit.back()));

    const Element zero = space.zero();
    for (int k = repeat_n; k < repeat_m; ++k) {
        if (!space.equal(orbit[k], zero)) {
            result.outcome = GenericOutcome::RepetitionWithoutAnnihilation;
            result.failure_witness = orbit[k];
            return result;
        }
    }
    for (int k = 1; k <= repeat_n; ++k) {
        if (space.equal(orbit[k], zero)) {
            result.outcome = GenericOutcome::Stabilized;
            result.index = k;
            return result;
        }
    }
    result.outcome = GenericOutcome::Stabilized;
    result.index = repeat_n;
    return result;
}

template <typename Element>
struct CancellationVerdict {
    bool pointed_on_samples = true;
    std::optional<Element> witness;  // nonzero x with x and -x both positive,
                                     // or a nonzero summand of a zero cone sum
};

// Scans samples for pointedness failures: an element whose negation is also
// in the cone, or a pair of cone elements summing to zero.
template <EffectSpaceInstance S>
CancellationVerdict<typename S::Element> cancellation_check(
    const S& space, const std::vector<typename S::Element>& samples) {
    CancellationVerdict<typename S::Element> verdict;
    const auto zero = space.zero();
    for (const auto& x : samples) {
        if (space.equal(x, zero)) continue;
        if (space.in_cone(x) && space.in_cone(space.subtract(zero, x))) {
            verdict.pointed_on_samples = false;
            verdict.witness = x;
            return verdict;
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i; j < samples.size(); ++j) {
            const auto& x = samples[i];
            const auto& y = samples[j];
            if (!space.in_cone(x) || !space.in_cone(y)) continue;
            if (space.equal(space.add(x, y), zero) && !space.equal(x, zero)) {
                verdict.pointed_on_samples = false;
                verdict.witness = x;
                return verdict;
            }
        }
    }
    return verdict;
}

// (u - T^p(u)) - Σ_{k<p} T^k(d); exactly zero for any additive map.
template <EffectSpaceInstance S>
typename S::Element telescoping_check(
    const S& space, const std::function<typename S::Element(const typename S::Element&)>& map,
    int p) {
    using Element = typename S::Element;
    const Element u = space.unit();
    const Element d = space.subtract(u, map(u));

    Element power = u;
    for (int k = 0; k < p; ++k) power = map(power);

    Element sum = space.zero();
    Element term = d;
    for (int k = 0; k < p; ++k) {
        sum = space.add(sum, term);
        term = map(term);
    }
    return space.subtract(space.subtract(u, power), sum);
}

struct MapPropertyCheck {
    bool additive = true;
    bool monotone = true;
    bool subunital = true;
};

// Additivity, monotonicity and subunitality on sample pairs.
template <EffectSpaceInstance S>
MapPropertyCheck check_map_properties(
    const S& space, const std::function<typename S::Element(const typename S::Element&)>& map,
    const std::vector<typename S::Element>& samples) {
    MapPropertyCheck out;
    const auto u = space.unit();
    out.subunital = space.in_cone(space.subtract(u, map(u)));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i; j < samples.size(); ++j) {
            const auto& x = samples[i];
            const auto& y = samples[j];
            if (!space.equal(map(space.add(x, y)), space.add(map(x), map(y))))
                out.additive = false;
            const auto diff = space.subtract(y, x);
            if (space.in_cone(diff) &&
                !space.in_cone(space.subtract(map(y), map(x))))
                out.monotone = false;
        }
    }
    return out;
}

}  // namespace defectlab
