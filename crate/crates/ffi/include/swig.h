#ifndef SWIG_FFI_H
#define SWIG_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwigCoupling {
  SWIG_COUPLING_INDEPENDENT = 0,
  SWIG_COUPLING_COMONOTONE = 1,
} SwigCoupling;

typedef enum SwigFormat {
  SWIG_FORMAT_TEXT = 0,
  SWIG_FORMAT_MACHINE = 1,
} SwigFormat;

// Result code of every fallible call.
typedef enum SwigStatus {
  SWIG_STATUS_OK = 0,
  SWIG_STATUS_NULL_POINTER = 1,
  SWIG_STATUS_INVALID_UTF8 = 2,
  SWIG_STATUS_PARSE = 3,
  SWIG_STATUS_GRAPH = 4,
  SWIG_STATUS_QUERY = 5,
  SWIG_STATUS_MODEL = 6,
  SWIG_STATUS_GUARD = 7,
  SWIG_STATUS_PANIC = 8,
} SwigStatus;

// Acyclic directed mixed graph.
typedef struct SwigGraph SwigGraph;

// Discrete structural model.
typedef struct SwigModel SwigModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after success.
// Valid until the next call on the same thread.
const char *swig_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string returned through a `char **` out parameter.
void swig_string_free(char *s);

// Parses a graph in the text format.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum SwigStatus swig_graph_parse(const char *text, struct SwigGraph **out);

// # Safety
// `g` must be null or a handle from this library, released once.
void swig_graph_free(struct SwigGraph *g);

// Canonical text of the graph.
//
// # Safety
// `g` must be a live handle; `out` must be writable.
enum SwigStatus swig_graph_render(const struct SwigGraph *g, char **out);

// Number of declared vertices, hidden ones included.
//
// # Safety
// `g` must be a live handle; `out` must be writable.
enum SwigStatus swig_graph_vertex_count(const struct SwigGraph *g, size_t *out);

// Latent projection onto the observed vertices, as a new handle.
//
// # Safety
// `g` must be a live handle; `out` must be writable.
enum SwigStatus swig_graph_project(const struct SwigGraph *g, struct SwigGraph **out);

// Separation in the SWIG of `treatment` (`"A=a,M=1"`, may be empty) for a
// query such as `"Y(a) _||_ A | C"`.
//
// # Safety
// Strings must be NUL-terminated; `g` live; `out` writable.
enum SwigStatus swig_separated(const struct SwigGraph *g,
                               const char *treatment,
                               const char *query,
                               bool *out);

// Identifies a counterfactual query. On success `identified` tells whether
// `out` holds an estimand or a hedge witness.
//
// # Safety
// `query` must be NUL-terminated; `g` live; `identified` and `out` writable.
enum SwigStatus swig_identify(const struct SwigGraph *g,
                              const char *query,
                              enum SwigFormat format,
                              bool *identified,
                              char **out);

// Parses a structural model in the text format.
//
// # Safety
// `text` must be NUL-terminated; `out` writable.
enum SwigStatus swig_model_parse(const char *text, struct SwigModel **out);

// Random model on the canonical DAG of `g`, seeded.
//
// # Safety
// `g` must be a live handle; `out` writable.
enum SwigStatus swig_model_random(const struct SwigGraph *g, uint64_t seed, struct SwigModel **out);

// # Safety
// `m` must be null or a handle from this library, released once.
void swig_model_free(struct SwigModel *m);

// Text of the model, parseable by [`swig_model_parse`].
//
// # Safety
// `m` must be a live handle; `out` writable.
enum SwigStatus swig_model_render(const struct SwigModel *m, char **out);

// Identifies `query` and compares the estimand with the exact oracle of
// each model. `identified` is false when the query has a hedge, in which
// case `max_abs_error` is left untouched.
//
// # Safety
// `models` must point to `n_models` live handles; other pointers as above.
enum SwigStatus swig_verify(const struct SwigGraph *g,
                            const char *query,
                            const struct SwigModel *const *models,
                            size_t n_models,
                            enum SwigCoupling coupling,
                            bool *identified,
                            double *max_abs_error);

// Version string of the library; static, not to be freed.
const char *swig_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SWIG_FFI_H */
