/*
 * libhlm: recovery of K linear subspaces from contaminated samples by l_p
 * energy minimization.
 *
 * Handles are opaque. Every call returns an hlm_status; on failure the
 * message of the last error on the calling thread is available through
 * hlm_last_error(). Strings returned through char** are owned by the caller
 * and released with hlm_string_free().
 */
#ifndef HLM_H
#define HLM_H

#include <stddef.h>
#include <stdint.h>

#if defined(HLM_BUILDING)
#define HLM_API __attribute__((visibility("default")))
#else
#define HLM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hlm_status {
  HLM_OK = 0,
  HLM_ERR_SHAPE = 1,
  HLM_ERR_DOMAIN = 2,
  HLM_ERR_CAPABILITY = 3,
  HLM_ERR_DEGENERATE = 4,
  HLM_ERR_BUDGET = 5,
  HLM_ERR_CONFIG = 6,
  HLM_ERR_IO = 7,
  HLM_ERR_CONDITION = 8,
  HLM_ERR_EMPTY = 9,
  HLM_ERR_ARGUMENT = 10,
  HLM_ERR_INTERNAL = 99
} hlm_status;

typedef struct hlm_config hlm_config;
typedef struct hlm_dataset hlm_dataset;

#define HLM_DEFAULT_SEED 20110101ULL

HLM_API const char* hlm_version(void);
HLM_API const char* hlm_last_error(void);
HLM_API const char* hlm_status_name(hlm_status status);
HLM_API void hlm_string_free(char* s);

/* Configuration: flat JSON object; unknown keys fail with HLM_ERR_CONFIG. */
HLM_API hlm_status hlm_config_parse(const char* json_text, hlm_config** out);
HLM_API hlm_status hlm_config_load(const char* path, hlm_config** out);
HLM_API void hlm_config_free(hlm_config* config);
HLM_API hlm_status hlm_config_set_seed(hlm_config* config, uint64_t seed);
HLM_API hlm_status hlm_config_seed(const hlm_config* config, uint64_t* out);
/* Canonical form of the whole config, and of its model part only. */
HLM_API hlm_status hlm_config_echo(const hlm_config* config, char** json_out);
HLM_API hlm_status hlm_config_model_echo(const hlm_config* config, char** json_out);
HLM_API hlm_status hlm_config_hash(const hlm_config* config, uint64_t* out);
/* Path of the `data` key, or NULL through *out when absent. */
HLM_API hlm_status hlm_config_data_path(const hlm_config* config, char** out);

/* Datasets. */
HLM_API hlm_status hlm_sample(const hlm_config* config, uint64_t seed, hlm_dataset** out);
HLM_API hlm_status hlm_dataset_from_points(const double* points, const int* labels, size_t n,
                                           size_t dim, hlm_dataset** out);
/* CSV or binary, detected from the file header. */
HLM_API hlm_status hlm_dataset_load(const char* path, hlm_dataset** out);
HLM_API hlm_status hlm_dataset_save_csv(const hlm_dataset* data, const char* path);
HLM_API hlm_status hlm_dataset_save_binary(const hlm_dataset* data, const char* path);
HLM_API hlm_status hlm_dataset_shape(const hlm_dataset* data, size_t* n, size_t* dim);
/* Row-major n x dim copy. */
HLM_API hlm_status hlm_dataset_points(const hlm_dataset* data, double* out);
HLM_API hlm_status hlm_dataset_labels(const hlm_dataset* data, int* out);
HLM_API void hlm_dataset_free(hlm_dataset* data);

/* Energy of the dataset against the model's truth tuple at exponent p. */
HLM_API hlm_status hlm_truth_energy(const hlm_config* config, const hlm_dataset* data, double p,
                                    double* out);

/* Multi-restart l_p K-flats at the first configured p. JSON result. */
HLM_API hlm_status hlm_fit(const hlm_config* config, const hlm_dataset* data, uint64_t seed,
                           int workers, char** json_out);
/* Grid-search global minimizer; D = 2, d = 1, K <= 2 only. */
HLM_API hlm_status hlm_oracle(const hlm_config* config, const hlm_dataset* data, int workers,
                              char** json_out);
HLM_API hlm_status hlm_bounds(const hlm_config* config, char** json_out);

/* Sweep over (p, alpha0, eps, N) x trials. Any output pointer may be NULL. */
HLM_API hlm_status hlm_sweep(const hlm_config* config, int workers, char** csv_out,
                             char** jsonl_out, char** summary_out, char** heatmap_svg_out,
                             char** distance_svg_out);

/* Property suite; *all_passed is 1 when every property holds. */
HLM_API hlm_status hlm_verify(uint64_t seed, int* all_passed, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* HLM_H */
