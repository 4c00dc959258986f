// verify.hpp — Seeded property suites behind the `verify` command and the
// acceptance harness. Each suite is deterministic given its seed and returns
// per-property counts.

#pragma once

#include "defectlab/json_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace defectlab {

class UnknownSuite : public std::invalid_argument {
public:
    explicit UnknownSuite(const std::string& what) : std::invalid_argument(what) {}
};

struct SuiteResult {
    std::string suite;
    int checks = 0;
    int failures = 0;
    std::vector<std::string> notes;  // first failure messages, capped

    void check(bool ok, const std::string& message) {
        ++checks;
        if (!ok) {
            ++failures;
            if (notes.size() < 20) notes.push_back(message);
        }
    }
    void absorb(const SuiteResult& other) {
        checks += other.checks;
        failures += other.failures;
        for (const std::string& n : other.notes)
            if (notes.size() < 20) notes.push_back(other.suite + ": " + n);
    }
};

Json suite_result_to_json(const SuiteResult& result);

SuiteResult cocycle_suite(std::uint64_t seed, int pairs);
SuiteResult cp_bound_suite(std::uint64_t seed, int instances);
SuiteResult parallel_suite(std::uint64_t seed, int random_pairs);
SuiteResult digraph_suite(std::uint64_t seed, int random_per_n);
SuiteResult faithfulness_suite(std::uint64_t seed, int probes_per_instance);
SuiteResult abstract_suite(std::uint64_t seed, int instances);
SuiteResult certificates_suite(std::uint64_t seed, int pairs);
SuiteResult scalar_suite(std::uint64_t seed, int sims);
SuiteResult asymptotic_suite(std::uint64_t seed);
SuiteResult instruments_suite(std::uint64_t seed, int instances);
SuiteResult shift_suite();

// Suites: cocycle, cp-bound, parallel, digraph, faithfulness, abstract,
// certificates, scalar, asymptotic, instruments, shift, all.
// Scale: "desk" (full counts) or "smoke" (reduced).
SuiteResult run_suite(const std::string& name, std::uint64_t seed, const std::string& scale);

}  // namespace defectlab
