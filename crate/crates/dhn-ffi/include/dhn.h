#ifndef DHN_H
#define DHN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Network family.
typedef enum DhnKind {
  DHN_KIND_PLAIN = 0,
  DHN_KIND_SKIP = 1,
  DHN_KIND_LIN = 2,
} DhnKind;

// Result code of every fallible call.
typedef enum DhnStatus {
  DHN_STATUS_OK = 0,
  // A required pointer argument was null.
  DHN_STATUS_NULL = 1,
  DHN_STATUS_INVALID_INPUT = 2,
  DHN_STATUS_PARSE = 3,
  DHN_STATUS_PRECISION = 4,
  DHN_STATUS_RESOURCE = 5,
  // A string argument was not valid UTF-8.
  DHN_STATUS_UTF8 = 6,
  // The library panicked; the handle arguments should be considered lost.
  DHN_STATUS_PANIC = 7,
} DhnStatus;

// Opaque network handle.
typedef struct DhnNetwork DhnNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call on this thread.
const char *dhn_last_error(void);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void dhn_string_free(char *s);

// # Safety
// `net` must be null or a handle returned by this library and not yet freed.
void dhn_network_free(struct DhnNetwork *net);

// Parses a network document.
//
// # Safety
// `json` must be a NUL-terminated string and `out_net` writable.
enum DhnStatus dhn_network_from_json(const char *json, struct DhnNetwork **out_net);

// Serializes a network; free the result with `dhn_string_free`.
//
// # Safety
// `net` must be a live handle and `out_json` writable.
enum DhnStatus dhn_network_to_json(const struct DhnNetwork *net, char **out_json);

// Input dimension, output dimension and number of hidden layers.
//
// # Safety
// `net` must be a live handle; the out pointers must be writable.
enum DhnStatus dhn_network_shape(const struct DhnNetwork *net,
                                 size_t *out_input_dim,
                                 size_t *out_output_dim,
                                 size_t *out_depth);

// Writes 1 to `out_valid` if the network satisfies its architecture
// constraints, 0 otherwise.
//
// # Safety
// `net` must be a live handle and `out_valid` writable.
enum DhnStatus dhn_network_validate(const struct DhnNetwork *net, int32_t *out_valid);

// Proven sup-norm error bound of a constructed approximator. Writes 1 to
// `out_present` and the bound to `out_bound` if the network carries one.
//
// # Safety
// `net` must be a live handle; the out pointers must be writable.
enum DhnStatus dhn_network_guarantee(const struct DhnNetwork *net,
                                     int32_t *out_present,
                                     double *out_bound);

// Evaluates the network at one point.
//
// # Safety
// `x` must hold `x_len` doubles and `y` room for `y_len` doubles.
enum DhnStatus dhn_network_eval(const struct DhnNetwork *net,
                                const double *x,
                                size_t x_len,
                                double *y,
                                size_t y_len);

// Number of maximal constant pieces of the network along the segment from
// `x1` to `x2`, each holding `len` coordinates.
//
// # Safety
// `x1` and `x2` must hold `len` doubles and `out_count` be writable.
enum DhnStatus dhn_network_piece_count(const struct DhnNetwork *net,
                                       const double *x1,
                                       const double *x2,
                                       size_t len,
                                       size_t *out_count);

// Indicator of the box `[a, b]` in `len` dimensions.
//
// # Safety
// `a` and `b` must hold `len` doubles and `out_net` be writable.
enum DhnStatus dhn_build_rect(const double *a,
                              const double *b,
                              size_t len,
                              struct DhnNetwork **out_net);

// Approximator of `x^2` with `l` hidden layers, first width `p1` and skip
// budgets `skips[0..skips_len]` for layers 2..=l.
//
// # Safety
// `skips` must hold `skips_len` values and `out_net` be writable.
enum DhnStatus dhn_build_square(size_t l,
                                size_t p1,
                                const size_t *skips,
                                size_t skips_len,
                                struct DhnNetwork **out_net);

// Network realizing `labels[0..labels_len]` (each 0 or 1) on the shattered
// point set of the geometry (`t` is ignored for skip networks).
//
// # Safety
// `labels` must hold `labels_len` bytes and `out_net` be writable.
enum DhnStatus dhn_build_shattering_net(enum DhnKind kind,
                                        size_t m,
                                        size_t n,
                                        size_t t,
                                        const uint8_t *labels,
                                        size_t labels_len,
                                        struct DhnNetwork **out_net);

// Exhaustively checks that every labeling of the shattered point set is
// realized within the depth and width budgets. Writes 1 to `out_passed` on
// success and the number of points to `out_points`.
//
// # Safety
// The out pointers must be writable.
enum DhnStatus dhn_shatter_verify(enum DhnKind kind,
                                  size_t m,
                                  size_t n,
                                  size_t t,
                                  int32_t *out_passed,
                                  size_t *out_points);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DHN_H */
