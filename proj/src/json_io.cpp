#include "defectlab/json_io.hpp"

namespace defectlab {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j)
            row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("matrix_from_json: expected non-empty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const Json& row = j.at(i);
        if (static_cast<int>(row.size()) != cols)
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (int c = 0; c < cols; ++c) {
            const Json& entry = row.at(c);
            if (!entry.is_array() || entry.size() != 2)
                throw std::invalid_argument("matrix_from_json: entries must be [re, im]");
            const double re = entry.at(0).get<double>();
            const double im = entry.at(1).get<double>();
            if (!std::isfinite(re) || !std::isfinite(im))
                throw std::invalid_argument("matrix_from_json: entries must be finite");
            m(i, c) = Complex(re, im);
        }
    }
    return m;
}

Json kraus_map_to_json(const KrausMap& t) {
    Json j;
    j["dim"] = t.dim;
    if (!t.label.empty()) j["label"] = t.label;
    Json kraus = Json::array();
    for (const Matrix& v : t.kraus) kraus.push_back(matrix_to_json(v));
    j["kraus"] = kraus;
    return j;
}

KrausMap kraus_map_from_json(const Json& j) {
    KrausMap t;
    t.dim = j.at("dim").get<int>();
    if (t.dim <= 0) throw std::invalid_argument("kraus_map_from_json: dim must be positive");
    if (j.contains("label")) t.label = j.at("label").get<std::string>();
    for (const Json& entry : j.at("kraus")) {
        Matrix v = matrix_from_json(entry);
        if (v.rows() != t.dim || v.cols() != t.dim)
            throw std::invalid_argument("kraus_map_from_json: operator dimension mismatch");
        t.kraus.push_back(std::move(v));
    }
    if (t.kraus.empty()) throw std::invalid_argument("kraus_map_from_json: empty Kraus family");
    return t;
}

Json filtration_to_json(const FiltrationCertificate& cert) {
    Json j;
    j["kind"] = "filtration";
    j["claimed_bound"] = cert.claimed_bound;
    Json chain = Json::array();
    for (const Matrix& p : cert.projections) chain.push_back(matrix_to_json(p));
    j["projections"] = chain;
    return j;
}

Json lyapunov_to_json(const LyapunovWitness& w) {
    Json j;
    j["kind"] = "lyapunov";
    j["sigma"] = matrix_to_json(w.sigma);
    j["c"] = w.c;
    return j;
}

Json discreteness_to_json(const DiscretenessWitness& w) {
    Json j;
    j["kind"] = "discreteness";
    j["delta"] = w.delta;
    j["epsilon"] = w.epsilon;
    if (w.lattice.is_grid) {
        j["lattice"] = {{"kind", "grid"}, {"delta", w.lattice.grid_delta}};
    } else {
        j["lattice"] = {{"kind", "finite"}, {"values", w.lattice.finite_values}};
    }
    return j;
}

ParsedCertificate certificate_from_json(const Json& j) {
    ParsedCertificate out;
    out.kind = j.at("kind").get<std::string>();
    if (out.kind == "filtration") {
        FiltrationCertificate cert;
        cert.claimed_bound = j.at("claimed_bound").get<int>();
        for (const Json& p : j.at("projections"))
            cert.projections.push_back(matrix_from_json(p));
        out.filtration = std::move(cert);
    } else if (out.kind == "lyapunov") {
        LyapunovWitness w;
        w.sigma = matrix_from_json(j.at("sigma"));
        w.c = j.at("c").get<double>();
        out.lyapunov = std::move(w);
    } else if (out.kind == "discreteness") {
        DiscretenessWitness w;
        w.delta = j.at("delta").get<double>();
        w.epsilon = j.at("epsilon").get<double>();
        const Json& lattice = j.at("lattice");
        if (lattice.at("kind").get<std::string>() == "grid") {
            w.lattice.is_grid = true;
            w.lattice.grid_delta = lattice.at("delta").get<double>();
        } else {
            w.lattice.is_grid = false;
            w.lattice.finite_values = lattice.at("values").get<std::vector<double>>();
        }
        out.discreteness = std::move(w);
    } else {
        throw std::invalid_argument("certificate_from_json: unknown kind '" + out.kind + "'");
    }
    return out;
}

Json system_to_json(const SubMarkovSystem& sys) {
    Json j;
    j["atoms"] = sys.atoms;
    Json weights = Json::array();
    for (const Rational& w : sys.weights) weights.push_back(rational_to_string(w));
    j["weights"] = weights;
    Json coeffs = Json::array();
    for (const auto& row : sys.coeffs) {
        Json r = Json::array();
        for (const Rational& p : row) r.push_back(rational_to_string(p));
        coeffs.push_back(r);
    }
    j["coeffs"] = coeffs;
    return j;
}

SubMarkovSystem system_from_json(const Json& j) {
    SubMarkovSystem sys;
    sys.atoms = j.at("atoms").get<int>();
    for (const Json& w : j.at("weights"))
        sys.weights.push_back(rational_from_string(w.get<std::string>()));
    for (const Json& row : j.at("coeffs")) {
        std::vector<Rational> r;
        for (const Json& p : row) r.push_back(rational_from_string(p.get<std::string>()));
        sys.coeffs.push_back(std::move(r));
    }
    validate_system(sys);
    return sys;
}

Json tolerances_to_json(const Tolerances& tol) {
    return Json{{"zero", tol.zero},
                {"rank", tol.rank},
                {"psd", tol.psd},
                {"herm", tol.herm},
                {"proj", tol.proj},
                {"note", "tolerance values are artifact choices"}};
}

}  // namespace defectlab
