#include "jointfit/signal.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace jointfit::signal {

namespace {

constexpr double kPi = std::numbers::pi;

void require_valid(const SampledSeries& s) {
    if (s.sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be positive");
    for (double v : s.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("invalid sample");
    }
}

// One second-order section, direct form II transposed, unit DC gain.
struct Biquad {
    double b0, b1, b2, a1, a2;

    // Steady-state internal state for a constant input x0 (exact DC passthrough).
    std::array<double, 2> steady_state(double x0) const {
        return {(b1 + b2 - a1 - a2) * x0, (b2 - a2) * x0};
    }
};

std::array<Biquad, 2> butterworth4_lowpass(double cutoff_hz, double sample_rate) {
    const double wa = std::tan(kPi * cutoff_hz / sample_rate);  // prewarped analog cutoff
    // Butterworth order-4 prototype pole pairs: s^2 + a1k*s + 1.
    const double a1k[2] = {2.0 * std::cos(3.0 * kPi / 8.0), 2.0 * std::cos(kPi / 8.0)};
    std::array<Biquad, 2> sos{};
    for (int k = 0; k < 2; ++k) {
        const double c = a1k[k] * wa;
        const double w2 = wa * wa;
        const double a0 = 1.0 + c + w2;
        sos[k] = Biquad{w2 / a0, 2.0 * w2 / a0, w2 / a0,
                        (2.0 * w2 - 2.0) / a0, (1.0 - c + w2) / a0};
    }
    return sos;
}

void filter_in_place(std::vector<double>& x, const Biquad& s) {
    if (x.empty()) return;
    auto z = s.steady_state(x.front());
    for (double& v : x) {
        const double in = v;
        v = s.b0 * in + z[0];
        z[0] = s.b1 * in - s.a1 * v + z[1];
        z[1] = s.b2 * in - s.a2 * v;
    }
}

}  // namespace

AmplitudeSpectrum amplitude_spectrum(const SampledSeries& s) {
    require_valid(s);
    const std::size_t n = s.values.size();
    if (n < 8) throw std::invalid_argument("series too short for spectrum (need >= 8 samples)");

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> freq(n);
    fft.fwd(freq, s.values);

    const std::size_t half = n / 2;  // one-sided bins 0..half
    AmplitudeSpectrum out;
    out.frequencies.resize(half + 1);
    out.magnitudes.resize(half + 1);
    const double df = s.sample_rate / static_cast<double>(n);
    for (std::size_t k = 0; k <= half; ++k) {
        out.frequencies[k] = df * static_cast<double>(k);
        double m = std::abs(freq[k]) / static_cast<double>(n);
        const bool endpoint = (k == 0) || (n % 2 == 0 && k == half);
        if (!endpoint) m *= std::numbers::sqrt2;
        out.magnitudes[k] = m;
    }
    return out;
}

double noise_floor(const SampledSeries& static_capture) {
    require_valid(static_capture);
    if (static_capture.values.size() < 2.0 * static_capture.sample_rate) {
        throw std::invalid_argument("insufficient static capture");
    }
    const AmplitudeSpectrum spec = amplitude_spectrum(static_capture);
    std::vector<double> mags(spec.magnitudes.begin() + 1, spec.magnitudes.end());
    std::sort(mags.begin(), mags.end());
    // Nearest-rank 95th percentile.
    const std::size_t idx = std::min(mags.size() - 1,
                                     static_cast<std::size_t>(std::ceil(0.95 * mags.size())) - 1);
    return mags[idx];
}

double select_cutoff(const AmplitudeSpectrum& moving, double floor_level, double margin) {
    if (moving.frequencies.empty()) throw std::invalid_argument("empty spectrum");
    if (margin < 1.0) throw std::invalid_argument("margin must be >= 1");
    const double nyquist = moving.frequencies.back();
    const double threshold = margin * floor_level;

    // Highest non-DC frequency whose bin still exceeds the threshold; the
    // cutoff must pass that bin.
    double f_exceed = 0.0;
    for (std::size_t k = moving.frequencies.size(); k-- > 1;) {
        if (moving.magnitudes[k] > threshold) {
            f_exceed = moving.frequencies[k];
            break;
        }
    }
    if (f_exceed > 0.8 * nyquist) throw std::runtime_error("no noise-dominated band");

    double cutoff = std::ceil(f_exceed / 0.5) * 0.5;
    cutoff = std::max(cutoff, 1.0);
    cutoff = std::min(cutoff, 0.8 * nyquist);
    return cutoff;
}

SampledSeries lowpass_zero_phase(const SampledSeries& s, double cutoff_hz) {
    require_valid(s);
    const double nyquist = s.sample_rate / 2.0;
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < nyquist)) {
        throw std::invalid_argument("cutoff out of range (0, Nyquist)");
    }
    const std::size_t n = s.values.size();
    if (n < 2) return s;

    const auto sos = butterworth4_lowpass(cutoff_hz, s.sample_rate);

    // Odd-reflection padding keeps the forward/backward transients off the
    // retained samples.
    const std::size_t pad = std::min<std::size_t>(15, n - 1);
    std::vector<double> x;
    x.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) x.push_back(2.0 * s.values.front() - s.values[i]);
    x.insert(x.end(), s.values.begin(), s.values.end());
    for (std::size_t i = 0; i < pad; ++i) x.push_back(2.0 * s.values.back() - s.values[n - 2 - i]);

    for (const auto& sec : sos) filter_in_place(x, sec);
    std::reverse(x.begin(), x.end());
    for (const auto& sec : sos) filter_in_place(x, sec);
    std::reverse(x.begin(), x.end());

    SampledSeries out;
    out.sample_rate = s.sample_rate;
    out.t0 = s.t0;
    out.values.assign(x.begin() + pad, x.begin() + pad + n);
    return out;
}

DerivativePair sliding_window_derivatives(const SampledSeries& s, int window, int degree) {
    require_valid(s);
    if (window % 2 == 0 || window < 3) throw std::invalid_argument("window must be odd and >= 3");
    if (degree < 2) throw std::invalid_argument("degree must be >= 2");
    if (window < degree + 1) throw std::invalid_argument("window must be >= degree + 1");
    const int n = static_cast<int>(s.values.size());
    if (n < window) throw std::invalid_argument("series shorter than window");

    const double dt = s.dt();
    const int half = window / 2;

    // Precompute the d1/d2 estimator rows for every distinct window placement:
    // `off` is the window start relative to the evaluation sample and runs
    // from -(window-1) (right edge) to 0 (left edge), with -half centered.
    struct Rows {
        Eigen::VectorXd r1, r2;
    };
    std::vector<Rows> rows(window);
    for (int off = -(window - 1); off <= 0; ++off) {
        Eigen::MatrixXd X(window, degree + 1);
        for (int j = 0; j < window; ++j) {
            const double t = (off + j) * dt;
            double p = 1.0;
            for (int k = 0; k <= degree; ++k) {
                X(j, k) = p;
                p *= t;
            }
        }
        // Rows of the pseudo-inverse corresponding to the linear and quadratic
        // coefficients of the local fit.
        const Eigen::MatrixXd pinv =
            X.completeOrthogonalDecomposition().pseudoInverse();
        rows[off + window - 1] = Rows{pinv.row(1), 2.0 * pinv.row(2)};
    }

    DerivativePair out;
    out.d1.sample_rate = out.d2.sample_rate = s.sample_rate;
    out.d1.t0 = out.d2.t0 = s.t0;
    out.d1.values.resize(n);
    out.d2.values.resize(n);

    for (int i = 0; i < n; ++i) {
        const int start = std::clamp(i - half, 0, n - window);
        const int off = start - i;
        const auto& r = rows[off + window - 1];
        double d1 = 0.0, d2 = 0.0;
        for (int j = 0; j < window; ++j) {
            d1 += r.r1(j) * s.values[start + j];
            d2 += r.r2(j) * s.values[start + j];
        }
        out.d1.values[i] = d1;
        out.d2.values[i] = d2;
    }
    return out;
}

}  // namespace jointfit::signal
