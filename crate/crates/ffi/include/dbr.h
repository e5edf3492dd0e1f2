#ifndef DBR_H
#define DBR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DBR_STATUS_OK = 0,
  DBR_STATUS_NULL_POINTER = 1,
  DBR_STATUS_INVALID_ARGUMENT = 2,
  DBR_STATUS_OUTSIDE_DISK = 3,
  DBR_STATUS_INVALID_SYMBOL = 4,
  DBR_STATUS_EXTREME_SYMBOL = 5,
  DBR_STATUS_INVALID_MEASURE = 6,
  DBR_STATUS_DIMENSION = 7,
  DBR_STATUS_RECOVERY = 8,
  DBR_STATUS_PARSE = 9,
  DBR_STATUS_PANIC = 10,
} DbrStatus;

typedef struct DbrGram DbrGram;

typedef struct DbrMeasure DbrMeasure;

typedef struct DbrPair DbrPair;

typedef struct {
  double re;
  double im;
} DbrComplex;

typedef struct {
  bool valid;
  bool nonextreme;
  bool inner;
} DbrSymbolFlags;

typedef struct {
  bool pass;
  double witness;
  double tolerance;
} DbrCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dbr_version(void);

/**
 * Message for the last failing call on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *dbr_last_error(void);

/**
 * Frees a string returned by this library.
 */
void dbr_string_free(char *s);

/**
 * New empty measure.
 */
DbrMeasure *dbr_measure_new(void);

void dbr_measure_free(DbrMeasure *m);

/**
 * Adds an atom of positive `weight` at `location` (closed disk).
 */
DbrStatus dbr_measure_add(DbrMeasure *m, DbrComplex location, double weight);

size_t dbr_measure_len(const DbrMeasure *m);

DbrStatus dbr_measure_atom(const DbrMeasure *m, size_t index, DbrComplex *location, double *weight);

/**
 * Parses `{"atoms":[{"re":..,"im":..,"weight":..}]}`.
 */
DbrStatus dbr_measure_from_json(const char *text, DbrMeasure **result);

/**
 * Serializes the measure; free the result with [`dbr_string_free`].
 */
DbrStatus dbr_measure_to_json(const DbrMeasure *m, char **result);

/**
 * Classifies `(c + γz)/(1 - βz)`. Never fails on bad coefficients; those
 * come back with `valid = false`.
 */
DbrStatus dbr_symbol_validate(DbrComplex c,
                              DbrComplex gamma,
                              DbrComplex beta,
                              DbrSymbolFlags *flags);

/**
 * Outer mate of a nonextreme symbol.
 */
DbrStatus dbr_pair_new(DbrComplex c, DbrComplex gamma, DbrComplex beta, DbrPair **result);

/**
 * Mate of the symbol synthesized from `|α|²δ_λ`.
 */
DbrStatus dbr_pair_from_synthesis(DbrComplex alpha, DbrComplex lambda, DbrPair **result);

void dbr_pair_free(DbrPair *p);

DbrStatus dbr_pair_coefficients(const DbrPair *p, double *rho, DbrComplex *sigma);

/**
 * `A` and `B` of `b(z) = A z/(1 - B z)` for `μ = |α|²δ_λ`.
 */
DbrStatus dbr_synthesize(DbrComplex alpha, DbrComplex lambda, double *a, DbrComplex *b);

DbrStatus dbr_verify_norm_equality(DbrComplex alpha,
                                   DbrComplex lambda,
                                   size_t n,
                                   double tol,
                                   DbrCertificate *cert);

/**
 * Monomial Gram of `D(μ)` for `z^0..z^{n-1}`.
 */
DbrStatus dbr_dmu_gram(const DbrMeasure *m, size_t n, DbrGram **result);

/**
 * Monomial Gram of `H(b)` for `z^0..z^{n-1}`.
 */
DbrStatus dbr_hb_gram(const DbrPair *p, size_t n, DbrGram **result);

void dbr_gram_free(DbrGram *g);

size_t dbr_gram_size(const DbrGram *g);

/**
 * `⟨z^col, z^row⟩`, i.e. entry `(row, col)`.
 */
DbrStatus dbr_gram_entry(const DbrGram *g, size_t row, size_t col, DbrComplex *value);

/**
 * Copies the matrix row-major into `buffer`, which holds `len` cells.
 */
DbrStatus dbr_gram_copy(const DbrGram *g, DbrComplex *buffer, size_t len);

/**
 * Largest eigenvalue of the order-`order` hyperexpansive form.
 */
DbrStatus dbr_hyperexpansive_max_eigenvalue(const DbrGram *g, size_t order, double *value);

/**
 * Numerical rank of a row-major `n×n` matrix at relative threshold `tau`.
 */
DbrStatus dbr_numerical_rank(const DbrComplex *data, size_t n, double tau, size_t *rank);

/**
 * Recovers atoms from a row-major `n×n` moment matrix. `atoms = 0` picks the
 * count automatically. `residual` may be null.
 */
DbrStatus dbr_recover_atoms(const DbrComplex *data,
                            size_t n,
                            size_t atoms,
                            DbrMeasure **result,
                            double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DBR_H */
