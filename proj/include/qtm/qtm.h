/* Copyright 2026 The qtmsim Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Public C API for the quantum Turing machine simulator. All functions are
 * deterministic given their inputs and seeds. Objects are opaque handles
 * owned by the caller and released with the matching _free function; report
 * strings are heap-allocated and released with qtm_string_free.
 *
 * The only observables the surface exposes are the halt flag and the tape
 * string (through monitored runs, distributions, and sampling); there is
 * deliberately no way to measure anything else.
 */

#ifndef QTM_QTM_H_
#define QTM_QTM_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qtm_status {
  QTM_OK = 0,
  QTM_ERR_PARSE = 1,        /* malformed machine file */
  QTM_ERR_VALIDATION = 2,   /* machine fails a validator */
  QTM_ERR_MISSING_RULE = 3, /* evolution reached an undeclared key */
  QTM_ERR_WINDOW = 4,       /* truncation window too small */
  QTM_ERR_CAPACITY = 5,     /* basis or label capacity exceeded */
  QTM_ERR_BAD_ARGUMENT = 6,
  QTM_ERR_ZERO_NORM = 7,
  QTM_ERR_INTERNAL = 8
} qtm_status;

/* Stable name for a status code, e.g. "parse-error". Static storage. */
const char* qtm_status_name(qtm_status s);

/* Message describing the most recent failure on this thread ("" if none). */
const char* qtm_last_error(void);

/* Frees a string returned through a char** out-parameter. NULL is a no-op. */
void qtm_string_free(char* s);

/* ---- Machines -------------------------------------------------------- */

typedef struct qtm_machine qtm_machine;

qtm_status qtm_machine_parse(const char* text, qtm_machine** out);
qtm_status qtm_machine_load(const char* path, qtm_machine** out);
void qtm_machine_free(qtm_machine* m);

int32_t qtm_machine_alphabet(const qtm_machine* m);
int32_t qtm_machine_state_count(const qtm_machine* m);
int32_t qtm_machine_initial_state(const qtm_machine* m);

/* Canonical machine-file text; parse(serialize(m)) reproduces m. */
qtm_status qtm_machine_serialize(const qtm_machine* m, char** out);

/* Runs the halt-preservation and column-orthonormality validators.
 * halt_ok / unitary_ok (each optional) receive 1/0. The report text holds
 * one line per finding plus a summary; records=1 selects the line-delimited
 * machine-readable form. Status stays QTM_OK even when validation fails;
 * only infrastructure problems return an error. */
qtm_status qtm_validate(const qtm_machine* m, int records, int* halt_ok,
                        int* unitary_ok, char** report);

/* ---- States ---------------------------------------------------------- */

typedef struct qtm_state qtm_state;

qtm_status qtm_state_new(qtm_state** out);
void qtm_state_free(qtm_state* s);

/* Adds amplitude (re, im) on the configuration with internal state q, head
 * position, halt bit, and a tape holding syms[i] at cells[i] (0 <= i <
 * n_cells); other cells are blank. Amplitudes on equal configurations sum. */
qtm_status qtm_state_add(qtm_state* s, int32_t q, int32_t head, int32_t halt,
                         const int32_t* cells, const int32_t* syms,
                         size_t n_cells, double re, double im);

size_t qtm_state_term_count(const qtm_state* s);
double qtm_state_norm_sq(const qtm_state* s);
qtm_status qtm_state_normalize(qtm_state* s);

/* psi(out) = U^steps psi(in) under the machine's transition table. */
qtm_status qtm_state_evolve(const qtm_machine* m, const qtm_state* in,
                            int32_t steps, qtm_state** out);

/* ---- Random streams --------------------------------------------------- */

typedef struct qtm_rng qtm_rng;

qtm_rng* qtm_rng_new(uint64_t seed);
void qtm_rng_free(qtm_rng* r);

/* ---- Monitored protocol ---------------------------------------------- */

/* One monitored run: the halt flag is measured before the first step and
 * after every step up to `horizon`; on outcome 1 the tape is measured.
 * halted_at receives the halting step or -1; output_label the measured tape
 * label (meaningful only when halted_at >= 0). */
qtm_status qtm_run_monitored(const qtm_machine* m, const qtm_state* psi0,
                             int32_t horizon, qtm_rng* rng,
                             int32_t* halted_at, uint64_t* output_label);

/* ---- Command-level reports ------------------------------------------- */

/* Monitored vs unmonitored output distribution after `steps`. pass receives
 * 1 iff the max difference (residuals included) is <= tol. */
qtm_status qtm_compare_report(const qtm_machine* m, const qtm_state* psi0,
                              int32_t steps, double tol, int records,
                              int* pass, char** report);

/* Builds the truncated model (window radius `window`, horizon `max_steps`)
 * and runs the commutation scan, the spectral-projection relation scan, and
 * the invariant-subspace identity suite on `trials` seeded random interior
 * vectors. pass receives 1 iff every deviation is <= tol and no scan was
 * vacuous. QTM_ERR_WINDOW reports an inadmissible window. */
qtm_status qtm_qnd_report(const qtm_machine* m, int32_t max_steps,
                          int32_t window, double tol, int32_t trials,
                          uint64_t seed, int records, int* pass,
                          char** report);

/* `runs` independent monitored executions with per-run streams derived from
 * `seed`; the report holds label frequencies, the halting-step histogram,
 * and a chi-squared comparison against the exact distribution. */
qtm_status qtm_sample_report(const qtm_machine* m, const qtm_state* psi0,
                             int32_t steps, int64_t runs, uint64_t seed,
                             int records, char** report);

#ifdef __cplusplus
}
#endif

#endif /* QTM_QTM_H_ */
