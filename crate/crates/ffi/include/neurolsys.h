#ifndef NEUROLSYS_H
#define NEUROLSYS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlsStatus {
  NLS_STATUS_OK = 0,
  NLS_STATUS_NULL_POINTER = 1,
  NLS_STATUS_INVALID_ARGUMENT = 2,
  NLS_STATUS_PARSE_ERROR = 3,
  NLS_STATUS_CONFIG_ERROR = 4,
  NLS_STATUS_RUNTIME_ERROR = 5,
  NLS_STATUS_IO_ERROR = 6,
  NLS_STATUS_PANIC = 7,
} NlsStatus;

typedef enum NlsWorldType {
  NLS_WORLD_TYPE_OPEN = 0,
  NLS_WORLD_TYPE_ROUNDED_BARRIER1 = 1,
  NLS_WORLD_TYPE_MAZE = 2,
} NlsWorldType;

typedef enum NlsEncoding {
  NLS_ENCODING_MATRIX = 0,
  NLS_ENCODING_LSYS = 1,
  NLS_ENCODING_MATRIX_LSG = 2,
} NlsEncoding;

typedef enum NlsDeathCause {
  NLS_DEATH_CAUSE_LIFE_SPAN = 0,
  NLS_DEATH_CAUSE_STARVED = 1,
  NLS_DEATH_CAUSE_WORLD_EMPTY = 2,
} NlsDeathCause;

typedef struct NlsGenotype NlsGenotype;

// The result of an evolutionary run: per-generation stats and the last
// evaluated population.
typedef struct NlsRun NlsRun;

// A world template: terrain only, food is scattered per life.
typedef struct NlsWorld NlsWorld;

typedef struct NlsProofStats {
  uint32_t i;
  uint64_t symbols;
  uint64_t terminals;
  uint64_t neurons;
} NlsProofStats;

typedef struct NlsLifeResult {
  uint32_t fitness;
  uint32_t clicks_lived;
  enum NlsDeathCause death_cause;
} NlsLifeResult;

typedef struct NlsGenerationStats {
  uint64_t generation;
  uint32_t max_food;
  double mean_food;
  uint32_t best_ever;
  uint32_t starved;
  double mean_clicks;
} NlsGenerationStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next library call on the same thread.
const char *nls_last_error_message(void);

// Releases a string returned by the library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void nls_string_free(char *s);

// # Safety
// `out` must be valid for writes.
enum NlsStatus nls_world_generate(enum NlsWorldType kind,
                                  size_t width,
                                  size_t height,
                                  uint64_t layout_seed,
                                  struct NlsWorld **out);

// Parses a world file.
//
// # Safety
// `text` must be a NUL-terminated string and `out` valid for writes.
enum NlsStatus nls_world_parse(const char *text, struct NlsWorld **out);

// # Safety
// `world` must be a live handle and `out` valid for writes.
enum NlsStatus nls_world_to_text(const struct NlsWorld *world, char **out);

// # Safety
// `world` must be a live handle and `out` valid for writes.
enum NlsStatus nls_world_open_count(const struct NlsWorld *world, size_t *out);

// # Safety
// `world` must come from this library and not be freed twice. NULL is ignored.
void nls_world_free(struct NlsWorld *world);

// A random genotype with default generation parameters. MatrixLSG
// returns the matrix form of a random Lsys genotype.
//
// # Safety
// `out` must be valid for writes.
enum NlsStatus nls_genotype_random(enum NlsEncoding kind,
                                   size_t neurons,
                                   uint64_t seed,
                                   struct NlsGenotype **out);

// Parses either genotype format; the header line decides which.
//
// # Safety
// `text` must be a NUL-terminated string and `out` valid for writes.
enum NlsStatus nls_genotype_parse(const char *text, struct NlsGenotype **out);

// # Safety
// `genotype` must be a live handle, `name` NULL or a NUL-terminated
// string, and `out` valid for writes.
enum NlsStatus nls_genotype_to_text(const struct NlsGenotype *genotype,
                                    const char *name,
                                    char **out);

// # Safety
// `genotype` must be a live handle and `out` valid for writes.
enum NlsStatus nls_genotype_gene_count(const struct NlsGenotype *genotype, size_t *out);

// # Safety
// `genotype` must be a live handle and `out` valid for writes.
enum NlsStatus nls_genotype_neurons(const struct NlsGenotype *genotype, size_t *out);

// # Safety
// `genotype` must come from this library and not be freed twice. NULL is ignored.
void nls_genotype_free(struct NlsGenotype *genotype);

// Lsys genotype size for `neurons` neurons.
//
// # Safety
// `out` must be valid for writes.
enum NlsStatus nls_lsys_gene_count(size_t neurons, size_t *out);

// # Safety
// `out` must be valid for writes.
enum NlsStatus nls_proof_stats(uint32_t i, struct NlsProofStats *out);

// Lives one animat with the streams of member `index` in `generation`.
// `config` is NULL for defaults or `key = value` text.
//
// # Safety
// Handles must be live, `config` NULL or NUL-terminated, `out` valid for writes.
enum NlsStatus nls_live(const struct NlsWorld *world,
                        const struct NlsGenotype *genotype,
                        const char *config,
                        uint64_t run_seed,
                        uint64_t generation,
                        size_t index,
                        struct NlsLifeResult *out);

// Evolves a fresh random population in `world`. Population size, neuron
// count and all other parameters come from `config` (NULL for defaults).
//
// # Safety
// `world` must be live, `config` NULL or NUL-terminated, `out` valid for writes.
enum NlsStatus nls_run_evolution(const struct NlsWorld *world,
                                 enum NlsEncoding kind,
                                 const char *config,
                                 uint64_t generations,
                                 uint64_t seed,
                                 struct NlsRun **out);

// # Safety
// `run` must be a live handle and `out` valid for writes.
enum NlsStatus nls_run_generations(const struct NlsRun *run, size_t *out);

// Stats of the generation at zero-based position `index`.
//
// # Safety
// `run` must be a live handle and `out` valid for writes.
enum NlsStatus nls_run_stats(const struct NlsRun *run,
                             size_t index,
                             struct NlsGenerationStats *out);

// Snapshot text of the run's final population.
//
// # Safety
// `run` must be a live handle and `out` valid for writes.
enum NlsStatus nls_run_population_text(const struct NlsRun *run, char **out);

// # Safety
// `run` must come from this library and not be freed twice. NULL is ignored.
void nls_run_free(struct NlsRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEUROLSYS_H */
