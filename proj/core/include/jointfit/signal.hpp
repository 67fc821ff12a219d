#pragma once

#include <optional>
#include <string>
#include <vector>

namespace jointfit::signal {

/// One uniformly sampled scalar channel.
struct SampledSeries {
    double sample_rate = 0.0;  // Hz
    double t0 = 0.0;           // s
    std::vector<double> values;

    double dt() const { return 1.0 / sample_rate; }
    std::size_t size() const { return values.size(); }
};

/// One-sided amplitude spectrum in RMS convention: the squared magnitudes sum
/// to the time-domain mean square (interior bins carry the sqrt(2) one-sided
/// doubling, DC and Nyquist do not). A pure tone of amplitude a shows up as
/// a/sqrt(2) in its bin; a constant c shows up as c at f = 0.
struct AmplitudeSpectrum {
    std::vector<double> frequencies;  // Hz, ascending, [0, fs/2]
    std::vector<double> magnitudes;   // input units
};

/// DFT amplitude spectrum. Requires length >= 8 and finite samples
/// (std::invalid_argument("invalid sample") otherwise).
AmplitudeSpectrum amplitude_spectrum(const SampledSeries& s);

/// White-noise floor level from a static capture: 95th percentile of the
/// spectrum magnitudes excluding the DC bin. Requires at least 2 s of data
/// (std::invalid_argument("insufficient static capture")).
double noise_floor(const SampledSeries& static_capture);

/// Smallest cutoff f* such that every bin above f* stays at or below
/// margin * floor, rounded up to the nearest 0.5 Hz and clamped to
/// [1 Hz, 0.8 * Nyquist]. Throws std::runtime_error("no noise-dominated band")
/// when no usable band exists below 0.8 * Nyquist.
double select_cutoff(const AmplitudeSpectrum& moving, double floor_level, double margin = 2.0);

/// Zero-phase (forward-backward) 4th-order Butterworth low-pass. Output
/// length equals input length. Cutoff must lie in (0, Nyquist).
SampledSeries lowpass_zero_phase(const SampledSeries& s, double cutoff_hz);

struct DerivativePair {
    SampledSeries d1;  // first derivative, units/s
    SampledSeries d2;  // second derivative, units/s^2
};

/// Sliding-window polynomial-regression differentiation: at each sample a
/// degree-`degree` polynomial is least-squares fitted over a centered window
/// of `window` samples and its first/second derivatives evaluated at that
/// sample. Ends use shifted (non-centered) windows, so polynomial inputs of
/// degree <= `degree` are reproduced exactly everywhere.
DerivativePair sliding_window_derivatives(const SampledSeries& s, int window = 21, int degree = 2);

}  // namespace jointfit::signal
