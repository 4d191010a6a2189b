/* uwjsa - underwater joint link scheduling and power allocation simulator.
 *
 * C interface of the shared library. All entry points return uwjsa_rc;
 * uwjsa_last_error() describes the most recent failure on the calling
 * thread. Handles are opaque and freed with their matching *_free call.
 */
#ifndef UWJSA_H
#define UWJSA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define UWJSA_API __declspec(dllexport)
#else
#define UWJSA_API __attribute__((visibility("default")))
#endif

typedef enum uwjsa_rc {
    UWJSA_OK = 0,
    UWJSA_ERR_RUNTIME = 1,  /* training/evaluation failure */
    UWJSA_ERR_CONFIG = 2,   /* malformed or inconsistent configuration */
    UWJSA_ERR_ARTIFACT = 3  /* unreadable or mismatched checkpoints/files */
} uwjsa_rc;

typedef struct uwjsa_config uwjsa_config; /* parsed scenario+trainer config */
typedef struct uwjsa_model uwjsa_model;   /* trained policy parameters */

UWJSA_API const char* uwjsa_version(void);

/* Message for the last failing call on this thread; empty string if none. */
UWJSA_API const char* uwjsa_last_error(void);

/* Configuration: JSON file (or run manifest) -> handle. */
UWJSA_API uwjsa_rc uwjsa_config_load(const char* path, uwjsa_config** out);
UWJSA_API uwjsa_rc uwjsa_config_parse(const char* json_text, uwjsa_config** out);
UWJSA_API void uwjsa_config_free(uwjsa_config* cfg);

/* Trains per config, writes training_log.csv, model checkpoint and manifest
 * under out_dir. On success *out_model (if non-NULL) receives the selected
 * model. */
UWJSA_API uwjsa_rc uwjsa_train(const uwjsa_config* cfg, const char* out_dir, uint64_t seed,
                               uwjsa_model** out_model);

/* Grid search over the curriculum hyper-parameters across `workers`
 * parallel jobs; writes sweep.csv, best_model/ and manifest. */
UWJSA_API uwjsa_rc uwjsa_sweep(const uwjsa_config* cfg, const char* out_dir, uint64_t seed,
                               int workers);

/* Checkpoint directory (or its checkpoint.json) -> handle. */
UWJSA_API uwjsa_rc uwjsa_model_load(const char* path, uwjsa_model** out);
UWJSA_API uwjsa_rc uwjsa_model_save(const uwjsa_model* model, const char* dir);
UWJSA_API void uwjsa_model_free(uwjsa_model* model);

/* Evaluates `policy` ("icrl" requires model; "epa"/"olpa"/"rpa"/"solpa"
 * ignore it) over seeded episodes; writes episodes.csv, aggregate.json and
 * manifest. write_trace != 0 additionally writes trace.csv. */
UWJSA_API uwjsa_rc uwjsa_eval(const uwjsa_config* cfg, const uwjsa_model* model,
                              const char* policy, int episodes, uint64_t seed,
                              const char* out_dir, int write_trace);

/* Evaluates the model plus all four baselines under identical episode seeds;
 * writes compare.csv and manifest. */
UWJSA_API uwjsa_rc uwjsa_compare(const uwjsa_config* cfg, const uwjsa_model* model, int episodes,
                                 uint64_t seed, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* UWJSA_H */
