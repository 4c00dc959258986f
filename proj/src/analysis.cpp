#include "defectlab/analysis.hpp"

namespace defectlab {

namespace {

Json rank_bounds_to_json(const RankBounds& rb) {
    return Json{{"rank_defect", rb.rank_defect},
                {"rank_unit_image", rb.rank_unit_image},
                {"kraus_bound", rb.kraus_bound},
                {"intrinsic_bound", rb.intrinsic_bound},
                {"actual_rank_q", rb.actual_rank_q}};
}

Json unitality_to_json(const UnitalityReport& u) {
    return Json{{"is_unital", u.is_unital},
                {"stabilized", u.stabilized},
                {"corner_faithful", u.corner_faithful},
                {"common_kernel_dim_on_q", u.common_kernel_dim_on_q},
                {"persistence",
                 Json{{"has_invertible_kraus", u.persistence.has_invertible_kraus},
                      {"kraus_span_dim", u.persistence.kraus_span_dim}}},
                {"verdict_consistent", u.verdict_consistent}};
}

}  // namespace

Json analyze_map(const KrausMap& t, const AnalyzeOptions& opts) {
    const Tolerances& tol = opts.tol;
    Json report;
    report["map"] = {{"dim", t.dim}, {"kraus_count", t.kraus.size()}};
    if (!t.label.empty()) report["map"]["label"] = t.label;
    report["tolerances"] = tolerances_to_json(tol);

    const DefectOrbitReport orbit = defect_orbit(t, opts.max_iter, tol);

    Json orbit_json;
    orbit_json["stabilized"] = orbit.index.stabilized;
    if (orbit.index.stabilized)
        orbit_json["index"] = orbit.index.index;
    else
        orbit_json["max_iter"] = orbit.index.index;
    orbit_json["trivial_defect"] = orbit.trivial_defect;
    orbit_json["defect_scale"] = orbit.defect_scale;
    Json orbit_matrices = Json::array();
    Json orbit_norms = Json::array();
    for (const Matrix& d : orbit.orbit) {
        orbit_matrices.push_back(matrix_to_json(d));
        orbit_norms.push_back(d.norm());
    }
    orbit_json["orbit"] = orbit_matrices;
    orbit_json["orbit_norms"] = orbit_norms;

    Matrix q;
    if (orbit.trivial_defect) {
        q = Matrix::Zero(t.dim, t.dim);
        orbit_json["orbit_support_source"] = "trivial";
    } else if (orbit.index.stabilized) {
        q = orbit_support(orbit, tol);
        orbit_json["orbit_support_source"] = "accumulated_defect";
    } else {
        q = reachability_closure(t, tol);
        orbit_json["orbit_support_source"] = "reachability_closure";
    }
    orbit_json["orbit_support"] = matrix_to_json(q);
    const int corner_rank = tolerant_rank(q, tol.rank);
    orbit_json["corner_rank"] = corner_rank;

    if (corner_rank > 0) {
        Matrix accumulated = Matrix::Zero(t.dim, t.dim);
        if (orbit.index.stabilized)
            for (int k = 0; k < orbit.index.index; ++k) accumulated += orbit.orbit[k];
        const CornerData corner = orbit.index.stabilized && !orbit.trivial_defect
                                      ? corner_map(t, q, accumulated, tol)
                                      : corner_map(t, q, tol);
        orbit_json["kernel_flag_dims"] = word_kernel_dims(corner.map, corner.map.dim, tol);
        const auto nil = nilpotency_index(corner.map, tol);
        if (nil) {
            orbit_json["corner_nilpotency_index"] = *nil;
            const NilpotentType type = classify_nilpotent_type(corner.map, tol);
            orbit_json["nilpotent_type"] = type.rank_sequence;
            orbit_json["maximal_type"] = type.is_maximal;
        } else {
            orbit_json["corner_nilpotency_index"] = nullptr;
        }
    } else {
        orbit_json["kernel_flag_dims"] = Json::array({0});
    }
    report["orbit"] = orbit_json;

    if (orbit.index.stabilized) {
        report["bounds"] = rank_bounds_to_json(rank_bounds(t, orbit, tol));
    } else {
        RankBounds rb;
        rb.rank_defect = tolerant_rank(orbit.orbit.front(), tol.rank);
        rb.rank_unit_image =
            tolerant_rank(apply_map(t, Matrix::Identity(t.dim, t.dim)), tol.rank);
        int kraus_ranks = 0;
        for (const Matrix& v : t.kraus) kraus_ranks += tolerant_rank_general(v, tol.rank);
        rb.kraus_bound = std::min(rb.rank_defect + kraus_ranks, t.dim);
        rb.intrinsic_bound = std::min(rb.rank_defect + rb.rank_unit_image, t.dim);
        rb.actual_rank_q = corner_rank;
        report["bounds"] = rank_bounds_to_json(rb);
        report["bounds"]["note"] = "orbit not stabilized; actual rank from reachability closure";
    }

    report["unitality"] = unitality_to_json(unitality_verdict(t, tol));

    const AsymptoticDefect ad = asymptotic_defect(t, tol);
    Json asym;
    asym["convergent"] = ad.convergent;
    asym["spectral_radius"] = ad.spectral_radius;
    asym["leakage_dim"] = ad.leakage_dim;
    if (ad.convergent) {
        asym["d_inf"] = matrix_to_json(ad.d_inf);
        asym["residual"] = ad.residual;
    }
    report["asymptotic"] = asym;
    return report;
}

CertifyResult certify_map(const KrausMap& t, const Json& certificate,
                          const AnalyzeOptions& opts) {
    const Tolerances& tol = opts.tol;
    const ParsedCertificate parsed = certificate_from_json(certificate);
    CertifyResult result;
    result.report["kind"] = parsed.kind;

    if (parsed.kind == "filtration") {
        const FiltrationVerdict fv = verify_filtration(t, *parsed.filtration, tol);
        const KrausLoweringVerdict kv = kraus_level_lowering(t, *parsed.filtration, tol);
        result.holds = fv.holds;
        Json details;
        details["holds"] = fv.holds;
        if (fv.implied_bound) details["implied_bound"] = *fv.implied_bound;
        Json failures = Json::array();
        for (const LevelResidual& f : fv.failures)
            failures.push_back({{"level", f.level}, {"residual", f.residual}});
        details["failures"] = failures;
        details["kraus_level_lowering"] = {{"holds", kv.holds},
                                           {"max_residual", kv.max_residual}};
        details["routes_agree"] = fv.holds == kv.holds;
        result.report["details"] = details;
        result.report["holds"] = fv.holds;
    } else if (parsed.kind == "lyapunov") {
        const LyapunovVerdict lv = lyapunov_check(t, *parsed.lyapunov, nullptr, tol);
        result.holds = lv.holds;
        result.report["holds"] = lv.holds;
        result.report["details"] = {{"holds", lv.holds},
                                    {"violation", lv.violation},
                                    {"omega_values", lv.omega_values},
                                    {"decay_consistent", lv.decay_consistent}};
    } else {
        // Discreteness: check the normalized-trace values of the defect orbit.
        const DefectOrbitReport orbit = defect_orbit(t, opts.max_iter, tol);
        std::vector<double> values;
        for (const Matrix& d : orbit.orbit) values.push_back(d.trace().real() / t.dim);
        const QuantizationVerdict qv = approx_quantization_check(values, *parsed.discreteness, tol);
        result.holds = qv.holds;
        result.report["holds"] = qv.holds;
        Json failures = Json::array();
        for (const LevelResidual& f : qv.failures)
            failures.push_back({{"index", f.level}, {"distance", f.residual}});
        result.report["details"] = {{"holds", qv.holds},
                                    {"effective_delta", qv.effective_delta},
                                    {"values", values},
                                    {"classification", qv.classification},
                                    {"failures", failures}};
    }
    return result;
}

Json classical_analyze(const Json& request) {
    const SubMarkovSystem sys = system_from_json(request.at("system"));

    std::vector<Rational> defect;
    if (request.contains("defect")) {
        for (const Json& d : request.at("defect"))
            defect.push_back(rational_from_string(d.get<std::string>()));
        if (static_cast<int>(defect.size()) != sys.atoms)
            throw std::invalid_argument("classical_analyze: defect size mismatch");
    } else {
        defect = system_defect(sys);
    }
    const int max_iter = request.value("max_iter", 0);

    Json report;
    report["system"] = system_to_json(sys);
    Json defect_json = Json::array();
    for (const Rational& d : defect) defect_json.push_back(rational_to_string(d));
    report["defect"] = defect_json;

    std::vector<int> support;
    for (int j = 0; j < sys.atoms; ++j)
        if (defect[j] != 0) support.push_back(j);

    Json digraph_json;
    if (support.empty()) {
        digraph_json["finite"] = true;
        digraph_json["height"] = 0;
        digraph_json["note"] = "zero defect";
    } else {
        const DigraphResult dg = digraph_height(sys, support);
        digraph_json["finite"] = dg.finite;
        if (dg.finite) {
            digraph_json["height"] = dg.height;
            digraph_json["predicted_index"] = dg.height + 1;
        } else {
            digraph_json["cycle"] = dg.cycle;
        }
    }
    report["digraph"] = digraph_json;

    const ClassicalOrbit orbit = classical_orbit(sys, defect, max_iter);
    Json orbit_json;
    orbit_json["stabilized"] = orbit.stabilized;
    if (orbit.stabilized) orbit_json["index"] = orbit.index;
    if (!orbit.cycle_witness.empty()) orbit_json["cycle_witness"] = orbit.cycle_witness;
    Json orbit_vals = Json::array();
    for (const auto& a : orbit.orbit) {
        Json row = Json::array();
        for (const Rational& x : a) row.push_back(rational_to_string(x));
        orbit_vals.push_back(row);
    }
    orbit_json["orbit"] = orbit_vals;
    report["orbit"] = orbit_json;

    if (!support.empty()) {
        const bool digraph_finite = report["digraph"]["finite"].get<bool>();
        bool agree = digraph_finite == orbit.stabilized;
        if (agree && orbit.stabilized)
            agree = orbit.index == report["digraph"]["predicted_index"].get<int>();
        report["agreement"] = agree;
    } else {
        report["agreement"] = true;
    }

    if (request.contains("rank_function")) {
        const auto r = request.at("rank_function").get<std::vector<int>>();
        const RankFunctionVerdict rv = rank_function_verify(sys, r, defect);
        Json rank_json;
        rank_json["holds"] = rv.holds;
        if (rv.offending_edge)
            rank_json["offending_edge"] = {rv.offending_edge->first, rv.offending_edge->second};
        if (rv.holds) {
            rank_json["bound"] = rv.bound;
            rank_json["orbit_confirms"] = rv.orbit_confirms;
            rank_json["filtration_exact"] = rv.filtration_exact;
        }
        report["rank_function"] = rank_json;
    }

    if (request.contains("lattice_denominator")) {
        const unsigned n = request.at("lattice_denominator").get<unsigned>();
        const BoundedDenomVerdict bv =
            bounded_denominator_propagation(sys, defect, n, max_iter > 0 ? max_iter : 64);
        Json lattice_json;
        lattice_json["hypothesis_holds"] = bv.hypothesis_holds;
        if (bv.hypothesis_holds) lattice_json["orbit_in_lattice"] = bv.orbit_in_lattice;
        if (bv.first_violation)
            lattice_json["first_violation"] = {bv.first_violation->first,
                                               bv.first_violation->second};
        report["bounded_denominators"] = lattice_json;

        if (request.contains("delta0")) {
            const Rational delta0 = rational_from_string(request.at("delta0").get<std::string>());
            const GapBoundResult gb = gap_bound(sys, defect, n, delta0);
            Json gap_json;
            gap_json["gap"] = rational_to_string(gb.gap);
            Json taus = Json::array();
            for (const Rational& tau : gb.trace_values) taus.push_back(rational_to_string(tau));
            gap_json["trace_values"] = taus;
            gap_json["gap_holds"] = gb.gap_holds;
            if (gb.contraction) gap_json["contraction"] = rational_to_string(*gb.contraction);
            if (gb.predicted_bound) {
                gap_json["predicted_bound"] = *gb.predicted_bound;
                gap_json["bound_confirmed"] = gb.bound_confirmed;
            }
            report["gap"] = gap_json;
        }
    }
    return report;
}

}  // namespace defectlab
