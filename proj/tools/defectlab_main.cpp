// defectlab — command line front end. All analysis goes through the C API in
// defectlab.h; this binary only parses arguments, moves strings and renders.

#include "defectlab.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

int status_to_exit(dl_status status) {
    switch (status) {
        case DL_OK: return 0;
        case DL_ERR_NOT_SUBUNITAL: return 2;
        case DL_ERR_CERT_FAILED: return 3;
        default: return 1;
    }
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text << "\n";
        return true;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return false;
    }
    out << text << "\n";
    return true;
}

uint64_t default_seed() {
    if (const char* env = std::getenv("DEFECTLAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring non-numeric DEFECTLAB_SEED\n";
        }
    }
    return 0;
}

struct MapHandle {
    dl_map* ptr = nullptr;
    ~MapHandle() { dl_map_free(ptr); }
};

struct StringHandle {
    char* ptr = nullptr;
    ~StringHandle() { dl_string_free(ptr); }
};

// Load a map from a JSON file or a generator descriptor.
dl_status load_map(const std::string& input, const std::string& descriptor, uint64_t seed,
                   MapHandle& handle) {
    if (!descriptor.empty()) return dl_map_generate(descriptor.c_str(), seed, &handle.ptr);
    const auto text = read_file(input);
    if (!text) {
        std::cerr << "error: cannot read " << input << "\n";
        return DL_ERR_IO;
    }
    return dl_map_from_json(text->c_str(), &handle.ptr);
}

// Secondary human rendering of the analyze report JSON.
void render_analysis(const json& report) {
    const auto& orbit = report.at("orbit");
    std::cout << "map: dim " << report.at("map").at("dim").get<int>();
    if (report.at("map").contains("label"))
        std::cout << "  [" << report.at("map").at("label").get<std::string>() << "]";
    std::cout << "\n";
    if (orbit.at("stabilized").get<bool>()) {
        std::cout << "stabilization index: " << orbit.at("index").get<int>();
        if (orbit.at("trivial_defect").get<bool>()) std::cout << " (zero defect)";
        std::cout << "\n";
    } else {
        std::cout << "not stabilized within " << orbit.at("max_iter").get<int>()
                  << " iterations\n";
    }
    std::cout << "corner rank: " << orbit.at("corner_rank").get<int>() << "\n";
    if (orbit.contains("maximal_type"))
        std::cout << "nilpotent type maximal: "
                  << (orbit.at("maximal_type").get<bool>() ? "yes" : "no") << "\n";
    const auto& unitality = report.at("unitality");
    std::cout << "unital: " << (unitality.at("is_unital").get<bool>() ? "yes" : "no")
              << ", corner-faithful: "
              << (unitality.at("corner_faithful").get<bool>() ? "yes" : "no") << "\n";
    const auto& asym = report.at("asymptotic");
    std::cout << "spectral radius on the leakage subspace: "
              << asym.at("spectral_radius").get<double>() << "\n";
    if (asym.at("convergent").get<bool>())
        std::cout << "asymptotic defect residual: " << asym.at("residual").get<double>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"defect-cocycle analysis for positive subunital maps"};
    app.require_subcommand(1);

    uint64_t seed = default_seed();
    dl_options opts;
    dl_options_init(&opts);
    std::string output_path;
    bool human = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "seed for randomized inputs");
        cmd->add_option("--zero-tol", opts.zero_tol, "numerical zero tolerance");
        cmd->add_option("--rank-tol", opts.rank_tol, "relative rank tolerance");
        cmd->add_option("--psd-tol", opts.psd_tol, "PSD order tolerance");
        cmd->add_option("-o,--output", output_path, "write JSON to this path");
    };

    // analyze
    std::string analyze_input, analyze_desc;
    auto* analyze = app.add_subcommand("analyze", "full defect-orbit analysis of a map");
    analyze->add_option("input", analyze_input, "map JSON file");
    analyze->add_option("--generate", analyze_desc, "generator descriptor instead of a file");
    analyze->add_option("--max-iter", opts.max_iter, "orbit iteration cutoff");
    analyze->add_flag("--human", human, "human-readable summary instead of JSON");
    add_common(analyze);

    // certify
    std::string certify_input, certify_desc, certificate_path;
    auto* certify = app.add_subcommand("certify", "check a certificate against a map");
    certify->add_option("input", certify_input, "map JSON file");
    certify->add_option("--generate", certify_desc, "generator descriptor instead of a file");
    certify->add_option("--certificate", certificate_path, "certificate JSON file")->required();
    add_common(certify);

    // classical
    std::string system_path, defect_csv, delta0, rank_csv;
    int lattice_den = 0;
    int classical_max_iter = 0;
    auto* classical = app.add_subcommand("classical", "exact sub-Markov system analysis");
    classical->add_option("system", system_path, "system JSON file")->required();
    classical->add_option("--defect", defect_csv, "comma-separated rational defect entries");
    classical->add_option("--max-iter", classical_max_iter, "orbit iteration cutoff");
    classical->add_option("--lattice-den", lattice_den, "check the 1/N coefficient lattice");
    classical->add_option("--delta0", delta0, "weight lower bound for the gap check");
    classical->add_option("--rank-function", rank_csv, "comma-separated rank values");
    add_common(classical);

    // generate
    std::string generate_desc;
    auto* generate = app.add_subcommand("generate", "emit a generated map as JSON");
    generate->add_option("descriptor", generate_desc, "generator descriptor")->required();
    add_common(generate);

    // verify
    std::string suite, scale = "desk";
    auto* verify = app.add_subcommand("verify", "run a seeded property suite");
    verify->add_option("suite", suite, "suite name or 'all'")->required();
    verify->add_option("--scale", scale, "desk or smoke");
    add_common(verify);

    // find-flag
    std::string flag_input, flag_desc;
    auto* findflag = app.add_subcommand("find-flag", "construct a filtration certificate");
    findflag->add_option("input", flag_input, "map JSON file");
    findflag->add_option("--generate", flag_desc, "generator descriptor instead of a file");
    add_common(findflag);

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) {
        MapHandle map;
        dl_status status = load_map(analyze_input, analyze_desc, seed, map);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        StringHandle out;
        status = dl_map_analyze(map.ptr, &opts, &out.ptr);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        if (human)
            render_analysis(json::parse(out.ptr));
        else if (!write_output(out.ptr, output_path))
            return 1;
        return 0;
    }

    if (certify->parsed()) {
        MapHandle map;
        dl_status status = load_map(certify_input, certify_desc, seed, map);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        const auto cert = read_file(certificate_path);
        if (!cert) {
            std::cerr << "error: cannot read " << certificate_path << "\n";
            return 1;
        }
        StringHandle out;
        status = dl_map_certify(map.ptr, cert->c_str(), &opts, &out.ptr);
        if (out.ptr && !write_output(out.ptr, output_path)) return 1;
        if (status != DL_OK && status != DL_ERR_CERT_FAILED)
            std::cerr << "error: " << dl_last_error() << "\n";
        return status_to_exit(status);
    }

    if (classical->parsed()) {
        const auto system_text = read_file(system_path);
        if (!system_text) {
            std::cerr << "error: cannot read " << system_path << "\n";
            return 1;
        }
        json request;
        try {
            request["system"] = json::parse(*system_text);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        auto split_csv = [](const std::string& csv) {
            std::vector<std::string> items;
            std::stringstream ss(csv);
            std::string item;
            while (std::getline(ss, item, ',')) items.push_back(item);
            return items;
        };
        if (!defect_csv.empty()) request["defect"] = split_csv(defect_csv);
        if (classical_max_iter > 0) request["max_iter"] = classical_max_iter;
        if (lattice_den > 0) request["lattice_denominator"] = lattice_den;
        if (!delta0.empty()) request["delta0"] = delta0;
        if (!rank_csv.empty()) {
            std::vector<int> ranks;
            for (const std::string& item : split_csv(rank_csv)) ranks.push_back(std::stoi(item));
            request["rank_function"] = ranks;
        }
        StringHandle out;
        const dl_status status = dl_classical_analyze(request.dump().c_str(), &out.ptr);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        if (!write_output(out.ptr, output_path)) return 1;
        return 0;
    }

    if (generate->parsed()) {
        MapHandle map;
        dl_status status = dl_map_generate(generate_desc.c_str(), seed, &map.ptr);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        StringHandle out;
        status = dl_map_to_json(map.ptr, &out.ptr);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        if (!write_output(out.ptr, output_path)) return 1;
        return 0;
    }

    if (verify->parsed()) {
        StringHandle out;
        const dl_status status = dl_verify_suite(suite.c_str(), seed, scale.c_str(), &out.ptr);
        if (out.ptr) {
            const json summary = json::parse(out.ptr);
            std::cout << "suite: " << summary.at("suite").get<std::string>() << "\n"
                      << "checks: " << summary.at("checks").get<int>() << "\n"
                      << "failures: " << summary.at("failures").get<int>() << "\n";
            for (const auto& note : summary.at("notes"))
                std::cout << "  " << note.get<std::string>() << "\n";
            if (!output_path.empty() && !write_output(out.ptr, output_path)) return 1;
        }
        if (status != DL_OK && status != DL_ERR_CERT_FAILED)
            std::cerr << "error: " << dl_last_error() << "\n";
        return status_to_exit(status);
    }

    if (findflag->parsed()) {
        MapHandle map;
        dl_status status = load_map(flag_input, flag_desc, seed, map);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        StringHandle out;
        status = dl_map_find_flag(map.ptr, &out.ptr);
        if (status != DL_OK) {
            std::cerr << "error: " << dl_last_error() << "\n";
            return status_to_exit(status);
        }
        if (!write_output(out.ptr, output_path)) return 1;
        return 0;
    }
    return 1;
}
