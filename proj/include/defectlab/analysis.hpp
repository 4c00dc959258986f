// analysis.hpp — Aggregated JSON reports: full map analysis, certificate
// verdicts and classical-system analysis. These back the C API and the CLI.

#pragma once

#include "defectlab/json_io.hpp"

namespace defectlab {

struct AnalyzeOptions {
    Tolerances tol;
    int max_iter = 0;  // <= 0 selects 4*dim
};

// Orbit report + unitality report + rank bounds + asymptotic data.
// Throws NotSubunital for maps with T(I) > I.
Json analyze_map(const KrausMap& t, const AnalyzeOptions& opts = {});

struct CertifyResult {
    bool holds = false;
    Json report;
};

// Dispatches on the certificate kind. Discreteness certificates are checked
// against the normalized-trace values of the map's defect orbit.
CertifyResult certify_map(const KrausMap& t, const Json& certificate,
                          const AnalyzeOptions& opts = {});

// Request: {"system": {...}, "defect": ["num/den", ...]?, "max_iter": int?,
//           "lattice_denominator": int?, "delta0": "num/den"?,
//           "rank_function": [int, ...]?}
// The defect defaults to 1 - row sums of the system.
Json classical_analyze(const Json& request);

}  // namespace defectlab
