#ifndef SYMSAT_H
#define SYMSAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SymsatStatus {
  SYMSAT_STATUS_OK = 0,
  SYMSAT_STATUS_NULL_ARGUMENT = 1,
  SYMSAT_STATUS_INVALID_ARGUMENT = 2,
  SYMSAT_STATUS_IO = 3,
  SYMSAT_STATUS_NUMERICAL = 4,
  SYMSAT_STATUS_BUFFER_TOO_SMALL = 5,
  SYMSAT_STATUS_PANIC = 6,
} SymsatStatus;

// A permutation group expression together with its conjugating permutation.
typedef struct SymsatGroup SymsatGroup;

// A trained model loaded from a checkpoint.
typedef struct SymsatModel SymsatModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *symsat_last_error(void);

// Library version as a static NUL-terminated string.
const char *symsat_version(void);

// Parses a group expression such as `S3 wr S3 * S3 wr S3 * S9` with the
// identity as conjugating permutation.
//
// # Safety
// `expr` must be a NUL-terminated string and `out` a valid pointer.
enum SymsatStatus symsat_group_parse(const char *expr, struct SymsatGroup **out);

// # Safety
// `group` must be null or a handle not yet freed.
void symsat_group_free(struct SymsatGroup *group);

// Number of points the group acts on, or 0 for a null handle.
//
// # Safety
// `group` must be null or a live handle.
size_t symsat_group_degree(const struct SymsatGroup *group);

// Dimension of the symmetric equivariant basis.
//
// # Safety
// `group` must be a live handle and `out` a valid pointer.
enum SymsatStatus symsat_group_basis_dim(const struct SymsatGroup *group, size_t *out);

// Writes the expression text into `buf`.
//
// # Safety
// `group` must be a live handle; `buf` must hold `len` bytes; `required`
// may be null.
enum SymsatStatus symsat_group_expr(const struct SymsatGroup *group,
                                    char *buf,
                                    size_t len,
                                    size_t *required);

// Copies the conjugating permutation (degree entries) into `out`.
//
// # Safety
// `group` must be a live handle and `out` hold `symsat_group_degree` entries.
enum SymsatStatus symsat_group_sigma(const struct SymsatGroup *group, size_t *out);

// Replaces the conjugating permutation.
//
// # Safety
// `group` must be a live handle and `sigma` hold `symsat_group_degree` entries.
enum SymsatStatus symsat_group_set_sigma(struct SymsatGroup *group, const size_t *sigma);

// Projects the `n × n` matrix `c` onto the matrices commuting with the
// group, writing the result to `out` (which may alias `c`).
//
// # Safety
// `c` and `out` must hold `n * n` doubles.
enum SymsatStatus symsat_group_project(const struct SymsatGroup *group,
                                       const double *c,
                                       size_t n,
                                       double *out);

// Discovers the symmetry group of an `n × n` matrix with default
// tolerances, optionally after scaling it to unit Frobenius norm.
//
// # Safety
// `m` must hold `n * n` doubles and `out` be a valid pointer.
enum SymsatStatus symsat_symfind(const double *m,
                                 size_t n,
                                 bool normalize,
                                 struct SymsatGroup **out);

// Loads a model checkpoint written by `symsat train`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SymsatStatus symsat_model_load(const char *path, struct SymsatModel **out);

// # Safety
// `model` must be null or a handle not yet freed.
void symsat_model_free(struct SymsatModel *model);

// Number of task bits the model completes, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t symsat_model_task_bits(const struct SymsatModel *model);

// Number of trainable parameters.
//
// # Safety
// `model` must be null or a live handle.
size_t symsat_model_param_count(const struct SymsatModel *model);

// Completes one example. `bits` and `given` hold one byte (0 or 1) per task
// bit; bits not given are ignored. `probs` receives the probability that
// every task bit is true (given bits are copied).
//
// # Safety
// `bits`, `given` and `probs` must hold `symsat_model_task_bits` entries.
enum SymsatStatus symsat_model_complete(const struct SymsatModel *model,
                                        const uint8_t *bits,
                                        const uint8_t *given,
                                        uint64_t seed,
                                        double *probs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMSAT_H */
