/* defectlab.h — C API for the defectlab analysis library.
 *
 * All analysis results cross the boundary as JSON strings owned by the
 * library; release them with dl_string_free. Maps are opaque handles
 * released with dl_map_free. Functions return DL_OK on success; on failure
 * dl_last_error() describes the problem for the calling thread.
 */

#ifndef DEFECTLAB_H
#define DEFECTLAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dl_status {
    DL_OK = 0,
    DL_ERR_IO = 1,             /* parse errors, malformed input */
    DL_ERR_NOT_SUBUNITAL = 2,  /* map fails T(I) <= I */
    DL_ERR_CERT_FAILED = 3,    /* certificate checked but does not hold */
    DL_ERR_INVALID = 4,        /* invalid arguments or descriptor */
    DL_ERR_INTERNAL = 5
} dl_status;

typedef struct dl_map dl_map;

typedef struct dl_options {
    double zero_tol;
    double rank_tol;
    double psd_tol;
    int32_t max_iter; /* <= 0 selects the default 4*dim */
} dl_options;

const char* dl_version(void);

/* Thread-local message for the most recent failure. */
const char* dl_last_error(void);

void dl_string_free(char* s);

void dl_options_init(dl_options* opts);

/* Generator descriptors: shift:4, dephasing:0.5, qubitpovm, randflag:5,seed=9,
 * randsub:4,seed=7, commuting:3,seed=2, randunital:3,seed=5, identity:4. */
dl_status dl_map_generate(const char* descriptor, uint64_t seed, dl_map** out);

dl_status dl_map_from_json(const char* json_text, dl_map** out);
dl_status dl_map_to_json(const dl_map* map, char** out_json);
int32_t dl_map_dim(const dl_map* map);
void dl_map_free(dl_map* map);

/* Full report: defect orbit, corner data, unitality, rank bounds,
 * asymptotics. */
dl_status dl_map_analyze(const dl_map* map, const dl_options* opts, char** out_json);

/* certificate_json: {"kind": "filtration"|"lyapunov"|"discreteness", ...}.
 * Returns DL_OK when the certificate holds, DL_ERR_CERT_FAILED when it is
 * well-formed but fails; the verdict JSON is produced in both cases. */
dl_status dl_map_certify(const dl_map* map, const char* certificate_json,
                         const dl_options* opts, char** out_json);

/* Builds the adjoint-kernel-flag filtration certificate when one exists. */
dl_status dl_map_find_flag(const dl_map* map, char** out_json);

/* request_json: {"system": {...}, "defect": [...]?, "max_iter"?,
 * "lattice_denominator"?, "delta0"?, "rank_function"?} */
dl_status dl_classical_analyze(const char* request_json, char** out_json);

/* Suites: cocycle, cp-bound, parallel, digraph, faithfulness, abstract,
 * certificates, scalar, asymptotic, instruments, shift, all.
 * scale: "desk" or "smoke". Returns DL_ERR_CERT_FAILED when checks fail. */
dl_status dl_verify_suite(const char* suite, uint64_t seed, const char* scale,
                          char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* DEFECTLAB_H */
