#ifndef GLASSCERT_H
#define GLASSCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum GcStatus {
  GC_STATUS_OK = 0,
  GC_STATUS_NULL_POINTER = 1,
  GC_STATUS_INVALID_UTF8 = 2,
  // Malformed model, bad argument or violated precondition.
  GC_STATUS_INVALID_INPUT = 3,
  // The cycle violates a hypothesis of the return-map theorem.
  GC_STATUS_ASSUMPTION_VIOLATED = 4,
  // A numerical degeneracy or non-convergence.
  GC_STATUS_NUMERICAL = 5,
  // An output buffer is too short.
  GC_STATUS_BUFFER_TOO_SMALL = 6,
  // A Rust panic was caught at the boundary.
  GC_STATUS_INTERNAL = 7,
} GcStatus;

// Opaque model handle.
typedef struct GcNetwork GcNetwork;

// Opaque sampled trajectory.
typedef struct GcSamples GcSamples;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *gc_last_error_message(void);

// Library version as a static nul-terminated string.
const char *gc_version(void);

// Parses a JSON model into a new handle stored in `*out`.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum GcStatus gc_network_from_json(const char *json, struct GcNetwork **out);

// Releases a handle; null is ignored.
//
// # Safety
// `net` must come from [`gc_network_from_json`] and not be used afterwards.
void gc_network_free(struct GcNetwork *net);

// Number of variables; 0 for a null handle.
//
// # Safety
// `net` must be null or a live handle.
uintptr_t gc_network_dimension(const struct GcNetwork *net);

// Writes the focal point of the domain with 0-based segment indices
// `domain[0..len]` into `out[0..out_len]`.
//
// # Safety
// Pointers must be valid for the given lengths.
enum GcStatus gc_focal_point(const struct GcNetwork *net,
                             const uintptr_t *domain,
                             uintptr_t len,
                             double *out,
                             uintptr_t out_len);

// Full analysis report as JSON in `*out`.
//
// # Safety
// `net` must be a live handle and `out` a valid pointer.
enum GcStatus gc_analyze_json(const struct GcNetwork *net, char **out);

// Certification of one cycle as JSON in `*out`. `cycle` is an id or a
// comma-separated domain list, or null when the model has a single
// deterministic cycle.
//
// # Safety
// `net` must be a live handle, `cycle` null or nul-terminated, `out` valid.
enum GcStatus gc_certify_json(const struct GcNetwork *net, const char *cycle, char **out);

// Simulates from `x0[0..len]` until `t_max` and samples every `dt`.
//
// # Safety
// `net` must be a live handle, `x0` valid for `len` reads, `out` valid.
enum GcStatus gc_simulate(const struct GcNetwork *net,
                          const double *x0,
                          uintptr_t len,
                          double t_max,
                          double dt,
                          struct GcSamples **out);

// Number of samples; 0 for null.
//
// # Safety
// `s` must be null or a live handle.
uintptr_t gc_samples_len(const struct GcSamples *s);

// State dimension of each sample; 0 for null.
//
// # Safety
// `s` must be null or a live handle.
uintptr_t gc_samples_dimension(const struct GcSamples *s);

// Copies sample `index` into `*t` and `x[0..x_len]`.
//
// # Safety
// `s` must be a live handle, `t` valid, `x` valid for `x_len` writes.
enum GcStatus gc_samples_get(const struct GcSamples *s,
                             uintptr_t index,
                             double *t,
                             double *x,
                             uintptr_t x_len);

// Releases samples; null is ignored.
//
// # Safety
// `s` must come from [`gc_simulate`] and not be used afterwards.
void gc_samples_free(struct GcSamples *s);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void gc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLASSCERT_H */
