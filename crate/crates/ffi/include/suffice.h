#ifndef SUFFICE_H
#define SUFFICE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SufficeOutcome {
  SUFFICE_OUTCOME_SECOND_WINS = 0,
  SUFFICE_OUTCOME_DRAW = 1,
  SUFFICE_OUTCOME_FIRST_WINS = 2,
} SufficeOutcome;

typedef enum SufficePlayer {
  SUFFICE_PLAYER_FIRST = 1,
  SUFFICE_PLAYER_SECOND = 2,
} SufficePlayer;

typedef enum SufficeStatus {
  SUFFICE_STATUS_OK = 0,
  SUFFICE_STATUS_NULL_POINTER = 1,
  SUFFICE_STATUS_INVALID_UTF8 = 2,
  SUFFICE_STATUS_SYNTAX = 3,
  SUFFICE_STATUS_OUT_OF_CLASS = 4,
  SUFFICE_STATUS_LEVEL_MISMATCH = 5,
  SUFFICE_STATUS_OVERFLOW = 6,
  SUFFICE_STATUS_BUDGET = 7,
  SUFFICE_STATUS_NON_CONVERGENCE = 8,
  SUFFICE_STATUS_PRECONDITION = 9,
  SUFFICE_STATUS_MALFORMED = 10,
  SUFFICE_STATUS_OUT_OF_BOUNDS = 11,
  SUFFICE_STATUS_CONFIG = 12,
  SUFFICE_STATUS_IO = 13,
  SUFFICE_STATUS_PANIC = 14,
} SufficeStatus;

typedef enum SufficeVariant {
  SUFFICE_VARIANT_PLAIN = 0,
  SUFFICE_VARIANT_STRICT = 1,
  SUFFICE_VARIANT_MONOTONE = 2,
} SufficeVariant;

typedef struct SufficeEstimator SufficeEstimator;

typedef struct SufficeParams SufficeParams;

typedef struct SufficeReport SufficeReport;

typedef struct SufficeSentence SufficeSentence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *suffice_version(void);

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread.
const char *suffice_last_error(void);

void suffice_string_free(char *s);

enum SufficeStatus suffice_sentence_parse(const char *text, struct SufficeSentence **out);

void suffice_sentence_free(struct SufficeSentence *s);

// Canonical text of the sentence.
enum SufficeStatus suffice_sentence_render(const struct SufficeSentence *s, char **out);

// Number of set quantifiers.
enum SufficeStatus suffice_sentence_depth(const struct SufficeSentence *s, size_t *out);

enum SufficeStatus suffice_sentence_negate(const struct SufficeSentence *s,
                                           struct SufficeSentence **out);

// Exact truth by exhaustive search over at most `max_bits` witness bits.
enum SufficeStatus suffice_brute_truth(const struct SufficeSentence *s,
                                       uint32_t max_bits,
                                       bool *out);

// Notion parameters with the given minimum lower end and rate text such as
// `lin(2)` or `sq`.
enum SufficeStatus suffice_params_new(uint64_t a_min, const char *rate, struct SufficeParams **out);

// Minimum element counts for levels `1..=len`.
enum SufficeStatus suffice_params_set_cover(struct SufficeParams *p,
                                            const size_t *mins,
                                            size_t len);

void suffice_params_free(struct SufficeParams *p);

enum SufficeStatus suffice_saturate(const struct SufficeSentence *s,
                                    const struct SufficeParams *p,
                                    struct SufficeEstimator **out);

// Parse the bracket form, e.g. `{L0(1,4),L0(2,6)}`.
enum SufficeStatus suffice_estimator_parse(const char *text, struct SufficeEstimator **out);

enum SufficeStatus suffice_estimator_render(const struct SufficeEstimator *e, char **out);

enum SufficeStatus suffice_estimator_level(const struct SufficeEstimator *e, uint32_t *out);

void suffice_estimator_free(struct SufficeEstimator *e);

enum SufficeStatus suffice_truth_by_estimator(const struct SufficeSentence *s,
                                              const struct SufficeEstimator *e,
                                              bool *out);

// Fill `out[0..len]` with a fast-growing sequence for `rate`.
enum SufficeStatus suffice_fastseq(const char *rate,
                                   enum SufficeVariant variant,
                                   uint64_t margin,
                                   uint64_t cap,
                                   uint64_t *out,
                                   size_t len);

// Bounded well-foundedness search; `relation` is `pred`, `succ`, `omega2`
// or a generated graph name, optionally followed by `@start`.
enum SufficeStatus suffice_wf_search(const char *relation,
                                     const uint64_t *a,
                                     size_t len,
                                     bool *out_well_founded);

// Value of the seeded random game tree.
enum SufficeStatus suffice_random_game_value(uint64_t seed,
                                             size_t plies,
                                             size_t branching,
                                             enum SufficeOutcome *out);

// Winner of the timeout game on a seeded random arena at `scale`, and of
// the parity game on the same arena.
enum SufficeStatus suffice_priority_game(uint64_t seed,
                                         size_t states,
                                         uint64_t scale,
                                         bool first_wants_odd,
                                         enum SufficePlayer *out_timeout_winner,
                                         enum SufficePlayer *out_parity_winner);

// Run an experiment from TOML text. Output paths in the config are
// honoured.
enum SufficeStatus suffice_run_experiment(const char *config_toml, struct SufficeReport **out);

enum SufficeStatus suffice_report_counts(const struct SufficeReport *r,
                                         size_t *out_cases,
                                         size_t *out_agreements,
                                         bool *out_budget_exhausted);

enum SufficeStatus suffice_report_csv(const struct SufficeReport *r, char **out);

enum SufficeStatus suffice_report_json(const struct SufficeReport *r, char **out);

void suffice_report_free(struct SufficeReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUFFICE_H */
