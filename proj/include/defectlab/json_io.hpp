// json_io.hpp — JSON encodings of maps, certificates, classical systems and
// analysis reports. Matrices are arrays of rows of [re, im] pairs; rationals
// are canonical "num/den" strings.

#pragma once

#include "defectlab/abstractcore.hpp"
#include "defectlab/certificates.hpp"
#include "defectlab/classical.hpp"
#include "defectlab/faithfulness.hpp"
#include "defectlab/stabilization.hpp"

#include <json.hpp>

namespace defectlab {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// {"dim": int, "label": string?, "kraus": [matrix, ...]}
Json kraus_map_to_json(const KrausMap& t);
KrausMap kraus_map_from_json(const Json& j);

Json filtration_to_json(const FiltrationCertificate& cert);
Json lyapunov_to_json(const LyapunovWitness& w);
Json discreteness_to_json(const DiscretenessWitness& w);

struct ParsedCertificate {
    std::string kind;  // "filtration" | "lyapunov" | "discreteness"
    std::optional<FiltrationCertificate> filtration;
    std::optional<LyapunovWitness> lyapunov;
    std::optional<DiscretenessWitness> discreteness;
};
ParsedCertificate certificate_from_json(const Json& j);

// {"atoms": n, "weights": ["num/den", ...], "coeffs": [["num/den", ...], ...]}
Json system_to_json(const SubMarkovSystem& sys);
SubMarkovSystem system_from_json(const Json& j);

Json tolerances_to_json(const Tolerances& tol);

}  // namespace defectlab
