#include "defectlab.h"

#include "defectlab/analysis.hpp"
#include "defectlab/verify.hpp"

#include <cstring>
#include <string>

struct dl_map {
    defectlab::KrausMap map;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

defectlab::AnalyzeOptions to_options(const dl_options* opts) {
    defectlab::AnalyzeOptions out;
    if (opts) {
        out.tol.zero = opts->zero_tol;
        out.tol.rank = opts->rank_tol;
        out.tol.psd = opts->psd_tol;
        out.max_iter = opts->max_iter;
    }
    return out;
}

template <typename Fn>
dl_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const defectlab::NotSubunital& e) {
        set_error(e.what());
        return DL_ERR_NOT_SUBUNITAL;
    } catch (const defectlab::MalformedCertificate& e) {
        set_error(e.what());
        return DL_ERR_IO;
    } catch (const defectlab::UnknownSuite& e) {
        set_error(e.what());
        return DL_ERR_INVALID;
    } catch (const defectlab::InvalidDescriptor& e) {
        set_error(e.what());
        return DL_ERR_INVALID;
    } catch (const nlohmann::json::exception& e) {
        set_error(e.what());
        return DL_ERR_IO;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return DL_ERR_IO;
    } catch (const std::exception& e) {
        set_error(e.what());
        return DL_ERR_INTERNAL;
    }
}

}  // namespace

extern "C" {

const char* dl_version(void) { return "0.1.0"; }

const char* dl_last_error(void) { return g_last_error.c_str(); }

void dl_string_free(char* s) { delete[] s; }

void dl_options_init(dl_options* opts) {
    if (!opts) return;
    const defectlab::Tolerances tol;
    opts->zero_tol = tol.zero;
    opts->rank_tol = tol.rank;
    opts->psd_tol = tol.psd;
    opts->max_iter = 0;
}

dl_status dl_map_generate(const char* descriptor, uint64_t seed, dl_map** out) {
    if (!descriptor || !out) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        *out = new dl_map{defectlab::generate(descriptor, seed)};
        return DL_OK;
    });
}

dl_status dl_map_from_json(const char* json_text, dl_map** out) {
    if (!json_text || !out) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        const defectlab::Json j = defectlab::Json::parse(json_text);
        *out = new dl_map{defectlab::kraus_map_from_json(j)};
        return DL_OK;
    });
}

dl_status dl_map_to_json(const dl_map* map, char** out_json) {
    if (!map || !out_json) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        *out_json = copy_string(defectlab::kraus_map_to_json(map->map).dump(2));
        return DL_OK;
    });
}

int32_t dl_map_dim(const dl_map* map) { return map ? map->map.dim : 0; }

void dl_map_free(dl_map* map) { delete map; }

dl_status dl_map_analyze(const dl_map* map, const dl_options* opts, char** out_json) {
    if (!map || !out_json) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        const defectlab::Json report = defectlab::analyze_map(map->map, to_options(opts));
        *out_json = copy_string(report.dump(2));
        return DL_OK;
    });
}

dl_status dl_map_certify(const dl_map* map, const char* certificate_json,
                         const dl_options* opts, char** out_json) {
    if (!map || !certificate_json || !out_json) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        const defectlab::Json cert = defectlab::Json::parse(certificate_json);
        const defectlab::CertifyResult result =
            defectlab::certify_map(map->map, cert, to_options(opts));
        *out_json = copy_string(result.report.dump(2));
        if (!result.holds) {
            set_error("certificate does not hold");
            return DL_ERR_CERT_FAILED;
        }
        return DL_OK;
    });
}

dl_status dl_map_find_flag(const dl_map* map, char** out_json) {
    if (!map || !out_json) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        const auto cert = defectlab::find_flag(map->map);
        if (!cert) {
            set_error("no filtration certificate covers the defect");
            return DL_ERR_CERT_FAILED;
        }
        *out_json = copy_string(defectlab::filtration_to_json(*cert).dump(2));
        return DL_OK;
    });
}

dl_status dl_classical_analyze(const char* request_json, char** out_json) {
    if (!request_json || !out_json) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        const defectlab::Json request = defectlab::Json::parse(request_json);
        *out_json = copy_string(defectlab::classical_analyze(request).dump(2));
        return DL_OK;
    });
}

dl_status dl_verify_suite(const char* suite, uint64_t seed, const char* scale,
                          char** out_json) {
    if (!suite || !out_json) {
        set_error("null argument");
        return DL_ERR_INVALID;
    }
    return guarded([&] {
        const defectlab::SuiteResult result =
            defectlab::run_suite(suite, seed, scale ? scale : "desk");
        *out_json = copy_string(defectlab::suite_result_to_json(result).dump(2));
        if (result.failures > 0) {
            set_error("suite reported failures");
            return DL_ERR_CERT_FAILED;
        }
        return DL_OK;
    });
}

}  // extern "C"
