#ifndef RQMC_H
#define RQMC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RqmcStatus {
  RQMC_STATUS_OK = 0,
  RQMC_STATUS_NULL_POINTER = 1,
  RQMC_STATUS_INVALID_ARGUMENT = 2,
  RQMC_STATUS_OUT_OF_RANGE = 3,
  RQMC_STATUS_GUARD = 4,
  RQMC_STATUS_IO = 5,
  RQMC_STATUS_BUFFER_TOO_SMALL = 6,
  RQMC_STATUS_PANIC = 7,
} RqmcStatus;

typedef enum RqmcGenerator {
  RQMC_GENERATOR_IDENTITY = 0,
  RQMC_GENERATOR_SOBOL = 1,
} RqmcGenerator;

typedef enum RqmcScramble {
  RQMC_SCRAMBLE_RANDOM_LINEAR = 0,
  RQMC_SCRAMBLE_ASM = 1,
  RQMC_SCRAMBLE_IDENTITY = 2,
} RqmcScramble;

typedef struct RqmcPartitionTable RqmcPartitionTable;

typedef struct RqmcPointSet RqmcPointSet;

/**
 * Net settings shared by point generation and experiments.
 */
typedef struct RqmcNetConfig {
  uint32_t m;
  uint32_t precision;
  uint32_t dim;
  enum RqmcGenerator generator;
  enum RqmcScramble scramble;
  uint64_t seed;
} RqmcNetConfig;

/**
 * RMSE summary for one `m`, as written by [`rqmc_experiment`].
 */
typedef struct RqmcRecord {
  uint32_t m;
  double rmse_median;
  double rmse_plain;
  double rmse_mean_proxy;
} RqmcRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *rqmc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rqmc_version(void);

/**
 * Points of replicate `replicate` for `config`, using the embedded Sobol' directions.
 */
enum RqmcStatus rqmc_pointset_new(const struct RqmcNetConfig *config,
                                  uint64_t replicate,
                                  struct RqmcPointSet **out);

void rqmc_pointset_free(struct RqmcPointSet *handle);

/**
 * Number of points, or 0 for a null handle.
 */
uint64_t rqmc_pointset_len(const struct RqmcPointSet *handle);

/**
 * Dimension, or 0 for a null handle.
 */
uint32_t rqmc_pointset_dim(const struct RqmcPointSet *handle);

/**
 * Coordinate `coord` of point `index` as a real in `[0, 1)`.
 */
enum RqmcStatus rqmc_pointset_get(const struct RqmcPointSet *handle,
                                  uint64_t index,
                                  uint32_t coord,
                                  double *out);

/**
 * Copies all points row-major into `buf`, which must hold `len * dim` doubles.
 */
enum RqmcStatus rqmc_pointset_copy(const struct RqmcPointSet *handle,
                                   double *buf,
                                   uint64_t capacity);

/**
 * Equal-weight mean of integrand `key` (e.g. "smooth1d", "poly:1,2") over the points.
 */
enum RqmcStatus rqmc_estimate_mean(const char *key, const struct RqmcPointSet *handle, double *out);

/**
 * Median-of-`count` experiment for `m` in `m_min..=m_max`; `config.m` is
 * ignored. Writes `m_max - m_min + 1` records to `records`.
 */
enum RqmcStatus rqmc_experiment(const char *key,
                                const struct RqmcNetConfig *config,
                                uint32_t m_min,
                                uint32_t m_max,
                                uint32_t count,
                                uint32_t medians,
                                struct RqmcRecord *records,
                                uint64_t capacity);

/**
 * Fraction of `trials` random scrambles with an XOR-zero row set of norm at
 * most `threshold`; a negative threshold means `floor(lambda m^2)`.
 */
enum RqmcStatus rqmc_mindep_fraction(uint32_t m,
                                     uint64_t trials,
                                     int64_t threshold,
                                     uint64_t seed,
                                     double *out);

/**
 * Whether `|{L : ||L|| <= floor(lambda m^2)}| < 0.4 2^m / sqrt(m)`, decided exactly.
 */
enum RqmcStatus rqmc_partition_bound_holds(uint32_t m, bool *out);

/**
 * Table of distinct-partition counts `q(N)` for `N <= max_n`.
 */
enum RqmcStatus rqmc_partition_table_new(uint64_t max_n, struct RqmcPartitionTable **out);

void rqmc_partition_table_free(struct RqmcPartitionTable *handle);

/**
 * `q(n)` as an integer; `OutOfRange` if `n` exceeds the table or the value 64 bits.
 */
enum RqmcStatus rqmc_partition_table_q(const struct RqmcPartitionTable *handle,
                                       uint64_t n,
                                       uint64_t *out);

/**
 * `q(n)` in decimal, NUL-terminated, into `buf` of `capacity` bytes. `written`
 * receives the length without the NUL, also when the buffer is too small.
 */
enum RqmcStatus rqmc_partition_table_q_decimal(const struct RqmcPartitionTable *handle,
                                               uint64_t n,
                                               char *buf,
                                               uint64_t capacity,
                                               uint64_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RQMC_H */
