/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CARDIOSEIS_H
#define CARDIOSEIS_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Status codes. Values 2-4 match the CLI exit codes.
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  // Null pointer, bad UTF-8, or an out-of-range argument at the boundary.
  CS_STATUS_INVALID_ARGUMENT = 1,
  // Bad input data or configuration.
  CS_STATUS_INPUT_ERROR = 2,
  // The data cannot be analysed (empty group, zero average, ...).
  CS_STATUS_DEGENERATE = 3,
  // Internal invariant violation or a caught panic.
  CS_STATUS_INTERNAL = 4,
  // Caller-provided output buffer is too small.
  CS_STATUS_BUFFER_TOO_SMALL = 5,
} CsStatus;

typedef enum CsCoupling {
  CS_COUPLING_VOLUME = 0,
  CS_COUPLING_FLOW = 1,
  CS_COUPLING_NONE = 2,
} CsCoupling;

typedef enum CsChannelKind {
  CS_CHANNEL_KIND_SCG = 0,
  CS_CHANNEL_KIND_ECG = 1,
  CS_CHANNEL_KIND_FLOW = 2,
} CsChannelKind;

typedef enum CsGroup {
  CS_GROUP_INSPIRATION = 0,
  CS_GROUP_EXPIRATION = 1,
  CS_GROUP_LLV = 2,
  CS_GROUP_HLV = 3,
} CsGroup;

typedef enum CsWinner {
  CS_WINNER_FLOW_RATE = 0,
  CS_WINNER_LUNG_VOLUME = 1,
  CS_WINNER_TIE = 2,
} CsWinner;

// Pipeline results for one or more recordings (opaque).
typedef struct CsAnalysis CsAnalysis;

// Detected events (opaque).
typedef struct CsEvents CsEvents;

// A synthetic recording with ground truth (opaque).
typedef struct CsSynth CsSynth;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or NULL. Valid until the next
// cardioseis call on the same thread.
const char *cs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cs_version(void);

// Frees a string returned by this library. NULL is ignored.
void cs_string_free(char *s);

enum CsStatus cs_rms(const double *x, size_t len, double *out);

// Zero-phase low-pass; `out` must hold `len` values.
enum CsStatus cs_lowpass(const double *x, size_t len, double fs, double cutoff_hz, double *out);

// Output length of [`cs_resample`] for the given input.
size_t cs_resample_len(size_t len, double fs, double target_fs);

// Rational resampling. `out` holds `out_cap` values; the number written
// goes to `out_len`.
enum CsStatus cs_resample(const double *x,
                          size_t len,
                          double fs,
                          double target_fs,
                          double *out,
                          size_t out_cap,
                          size_t *out_len);

// Hilbert envelope; `out` must hold `len` values.
enum CsStatus cs_hilbert_envelope(const double *x, size_t len, double *out);

enum CsStatus cs_best_lag(const double *x,
                          size_t x_len,
                          const double *y,
                          size_t y_len,
                          size_t max_lag,
                          ptrdiff_t *out);

// Normalized dissimilarity (%) of `event` against `avg`, both `len` long.
enum CsStatus cs_normalized_dissim(const double *event, const double *avg, size_t len, double *out);

enum CsStatus cs_relative_difference(double mean_same, double mean_alt, double *out);

// Detects events in a conditioned channel using the template at samples
// `template_start .. template_start + template_len`.
enum CsStatus cs_detect_events(const double *x,
                               size_t len,
                               double fs,
                               size_t template_start,
                               size_t template_len,
                               double threshold_frac,
                               double min_separation_s,
                               struct CsEvents **out);

size_t cs_events_count(const struct CsEvents *events);

// Copies up to `cap` reference indices into `out`.
enum CsStatus cs_events_ref_indices(const struct CsEvents *events, size_t *out, size_t cap);

void cs_events_free(struct CsEvents *events);

// Generates a synthetic recording with the default morphologies.
// A non-finite `snr_db` produces a noiseless recording.
enum CsStatus cs_synth_generate(uint64_t seed,
                                enum CsCoupling coupling,
                                double duration_s,
                                double fs,
                                double snr_db,
                                double coupling_strength,
                                struct CsSynth **out);

// Borrows a channel of a synthetic recording. The pointer stays valid
// until the handle is freed.
enum CsStatus cs_synth_channel(const struct CsSynth *synth,
                               enum CsChannelKind kind,
                               const double **data,
                               size_t *len);

size_t cs_synth_beat_count(const struct CsSynth *synth);

enum CsStatus cs_synth_beat_indices(const struct CsSynth *synth, size_t *out, size_t cap);

void cs_synth_free(struct CsSynth *synth);

// Runs the pipeline described by a config file (inputs, rates, template
// span). Nothing is written to disk; see [`cs_analysis_write`].
enum CsStatus cs_analysis_run(const char *config_path, struct CsAnalysis **out);

// Analyses a synthetic recording in memory at `analysis_fs`, using its
// first beat as the template and default settings otherwise.
enum CsStatus cs_analysis_from_synth(const struct CsSynth *synth,
                                     double analysis_fs,
                                     struct CsAnalysis **out);

size_t cs_analysis_recording_count(const struct CsAnalysis *analysis);

// Relative difference (%) and event count of one group of one recording.
enum CsStatus cs_analysis_group(const struct CsAnalysis *analysis,
                                size_t recording_index,
                                enum CsGroup group,
                                double *rd,
                                size_t *n_events);

// Winner for a pair (0 = inspiration/LLV, 1 = expiration/HLV) or, with
// `pair == 2`, the overall winner.
enum CsStatus cs_analysis_winner(const struct CsAnalysis *analysis,
                                 size_t recording_index,
                                 size_t pair,
                                 enum CsWinner *out);

// The JSON report as a new string; free it with [`cs_string_free`].
enum CsStatus cs_analysis_report_json(const struct CsAnalysis *analysis, char **out);

// Writes the report and plot files into `out_dir`.
enum CsStatus cs_analysis_write(const struct CsAnalysis *analysis, const char *out_dir);

void cs_analysis_free(struct CsAnalysis *analysis);

// Checks a JSON report for internal consistency. `problems` receives the
// number of inconsistencies found (0 means consistent).
enum CsStatus cs_report_check_json(const char *json, size_t *problems);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARDIOSEIS_H */
