/* C ABI for the molpulse diffusion-channel toolkit. */

#ifndef MOLPULSE_H
#define MOLPULSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum MpStatus {
  // Success.
  MP_STATUS_OK = 0,
  // A required pointer argument was NULL.
  MP_STATUS_NULL_ARGUMENT = 1,
  // An argument was outside its domain or violated a config invariant.
  MP_STATUS_INVALID_ARGUMENT = 2,
  // A numerical method failed to reach its tolerance.
  MP_STATUS_NUMERICAL_FAILURE = 3,
  // An internal panic was caught at the boundary.
  MP_STATUS_INTERNAL_PANIC = 4,
} MpStatus;

// Inverse Laplace algorithm selector for [`mp_channel_invert_transfer`].
typedef enum MpInversionMethod {
  // Fixed-Talbot contour; `param` is the node count (>= 8, 0 = default 32).
  MP_INVERSION_METHOD_FIXED_TALBOT = 0,
  // Gaver-Stehfest; `param` is the even term count in [4, 20]
  // (0 = default 14).
  MP_INVERSION_METHOD_GAVER_STEHFEST = 1,
} MpInversionMethod;

// Transmit pulse selector for the link simulator.
typedef enum MpPulseKind {
  // Unit mass in the symbol's first bin.
  MP_PULSE_KIND_RAW = 0,
  // Channel-inversion composite pulse.
  MP_PULSE_KIND_CHANNEL_INVERSION = 1,
  // Window-design composite pulse (erfc(1)-scaled).
  MP_PULSE_KIND_WINDOW_DESIGN = 2,
} MpPulseKind;

// Opaque diffusion-channel handle.
typedef struct MpChannel MpChannel;

// Opaque composite-pulse handle.
typedef struct MpPulse MpPulse;

// On-off-keyed link parameters.
typedef struct MpLinkConfig {
  double symbol_period;
  uint64_t n_symbols;
  uint64_t samples_per_symbol;
  // Standard deviation of the per-bin additive Gaussian noise.
  double noise_sigma;
  // Ignored when `threshold_auto` is true.
  double threshold;
  bool threshold_auto;
  // Seeds both the pseudo-random bit pattern and the noise stream.
  uint64_t seed;
} MpLinkConfig;

// Link-simulation summary.
typedef struct MpBerReport {
  uint64_t n_symbols;
  uint64_t n_errors;
  double ber;
  double threshold;
  // Single-pulse response mass beyond one symbol period / total mass.
  double tail_energy_ratio;
} MpBerReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code.
const char *mp_status_message(enum MpStatus status);

// Creates a channel handle for receiver distance `x` and diffusivity `d`;
// both must be positive and finite.
//
// # Safety
// `out` must be a valid pointer. The returned handle must be released
// with [`mp_channel_free`].
enum MpStatus mp_channel_new(double x, double d, struct MpChannel **out);

// Releases a channel handle; NULL is a no-op.
//
// # Safety
// `ch` must have come from [`mp_channel_new`] and not been freed before.
void mp_channel_free(struct MpChannel *ch);

// Response peak time x²/(6D).
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid.
enum MpStatus mp_channel_peak_time(const struct MpChannel *ch, double *out);

// Hitting concentration at time `t > 0`.
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid.
enum MpStatus mp_channel_hitting_concentration(const struct MpChannel *ch, double t, double *out);

// Fraction of molecules captured by time `t >= 0`.
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid.
enum MpStatus mp_channel_capture_cdf(const struct MpChannel *ch, double t, double *out);

// Capture rate h(t) at time `t > 0`.
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid.
enum MpStatus mp_channel_impulse_response(const struct MpChannel *ch, double t, double *out);

// Transfer function H(s) = exp(-x·sqrt(s/D)) for `s >= 0`.
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid.
enum MpStatus mp_channel_transfer_function(const struct MpChannel *ch, double s, double *out);

// Fills `out[0..n_bins]` with per-bin capture fractions on a uniform grid
// of width `dt`.
//
// # Safety
// `ch` must be a live channel handle; `out` must point to at least
// `n_bins` doubles.
enum MpStatus mp_channel_binned_response(const struct MpChannel *ch,
                                         double dt,
                                         uint64_t n_bins,
                                         double *out);

// Numerically inverts H(s) at time `t`; `param` = 0 picks the method's
// default order.
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid.
enum MpStatus mp_channel_invert_transfer(const struct MpChannel *ch,
                                         double t,
                                         enum MpInversionMethod method,
                                         uint32_t param,
                                         double *out);

// Builds the channel-inversion composite pulse for `ch`.
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid. The returned
// handle must be released with [`mp_pulse_free`].
enum MpStatus mp_pulse_channel_inversion(const struct MpChannel *ch, struct MpPulse **out);

// Builds the window-design composite pulse for `ch` (the erfc(1)-scaled
// twin of the channel-inversion pulse).
//
// # Safety
// `ch` must be a live channel handle; `out` must be valid. The returned
// handle must be released with [`mp_pulse_free`].
enum MpStatus mp_pulse_window_design(const struct MpChannel *ch, struct MpPulse **out);

// Releases a pulse handle; NULL is a no-op.
//
// # Safety
// `pulse` must have come from a pulse constructor and not been freed.
void mp_pulse_free(struct MpPulse *pulse);

// Reads the five analytic pulse fields at once. Any out pointer may be
// NULL to skip that field.
//
// # Safety
// `pulse` must be a live pulse handle; non-NULL out pointers must be valid.
enum MpStatus mp_pulse_fields(const struct MpPulse *pulse,
                              double *info_amplitude,
                              double *poison_coefficient,
                              double *poison_start,
                              double *poison_horizon,
                              double *scale);

// Moves the poison emission window; requires 0 < start < horizon.
//
// # Safety
// `pulse` must be a live, uniquely held pulse handle.
enum MpStatus mp_pulse_set_poison_window(struct MpPulse *pulse, double start, double horizon);

// Realizes the pulse on a uniform grid: fills the two nonnegative
// per-bin emission schedules (information compound and poison compound).
//
// # Safety
// `pulse` must be a live pulse handle; `compound_a` and `compound_b`
// must each point to at least `n_bins` doubles.
enum MpStatus mp_pulse_realize(const struct MpPulse *pulse,
                               double dt,
                               uint64_t n_bins,
                               double *compound_a,
                               double *compound_b);

// Net received mass per bin for the pulse through the channel.
//
// # Safety
// `pulse` and `ch` must be live handles; `out` must point to at least
// `n_bins` doubles.
enum MpStatus mp_pulse_shaped_response(const struct MpPulse *pulse,
                                       const struct MpChannel *ch,
                                       double dt,
                                       uint64_t n_bins,
                                       double *out);

// Runs the on-off-keyed link with seeded pseudo-random bits and fills a
// summary report.
//
// # Safety
// `ch`, `cfg`, and `out` must be valid pointers.
enum MpStatus mp_link_simulate(const struct MpChannel *ch,
                               const struct MpLinkConfig *cfg,
                               enum MpPulseKind kind,
                               struct MpBerReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOLPULSE_H */
