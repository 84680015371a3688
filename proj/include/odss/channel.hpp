#pragma once

#include "odss/common.hpp"
#include "odss/resample.hpp"

#include <random>
#include <string>

namespace odss::channel {

/// One discrete reflector: r(t) += gain * s(scale * (t - delay)).
struct Path {
    Complex gain{1.0, 0.0};
    double delay_s = 0.0;
    double scale = 1.0;
};

using PathSet = std::vector<Path>;

/// Statistical description of a channel draw: Rayleigh path amplitudes
/// (complex normal, unit variance), delays uniform on (0, tau_max),
/// time-scales uniform on (1/alpha_max, alpha_max).
struct ChannelSpec {
    double tau_max_s = 0.010;
    double alpha_max = 1.001;
    int paths = 20;
};

struct ResamplerConfig {
    int oversample = 8;
    double rational_tol = 1e-5;
    int taps = 31;
    std::int64_t max_denominator = 1000000;
    bool sqrt_alpha_gain = false;  // energy-preserving sqrt(alpha) amplitude; off in the discrete pipeline
};

/// Per-path quantities as realized by the resampler: the rational scale
/// approximation and the delay rounded to the fine grid. The effective
/// applied response is s(alpha_hat * t - tau_fine), i.e. an equivalent
/// path delay of tau_fine / alpha_hat.
struct RealizedPath {
    dsp::Rational alpha;
    std::int64_t delay_fine = 0;  // round(tau * fs * oversample)
    double tau_fine_s = 0.0;      // delay_fine / (fs * oversample)
};

RealizedPath realize_path(const Path& p, const ResamplerConfig& cfg, double fs);

PathSet draw_paths(const ChannelSpec& spec, std::uint64_t seed);

/// Applies the wideband delay-scale channel at complex baseband. Per path:
/// upsample by cfg.oversample (FFT zero-padding), shift by the rounded
/// fine-grid delay, resample by the rational approximation of the scale,
/// rotate by the carrier term exp(j 2 pi f_c ((alpha-1) t - alpha tau)),
/// downsample, and accumulate with the path gain. The output window is
/// extended so no path energy is truncated.
VecC apply_channel(const VecC& s, const PathSet& paths, const ResamplerConfig& cfg, double fs,
                   double carrier_hz);

/// Closed-form cascade of two discrete delay-scale channels: applying h1
/// then h2 equals the single channel omega_convolve(h2, h1); combined path
/// (g2*g1, tau2 + tau1/alpha2, alpha2*alpha1).
PathSet omega_convolve(const PathSet& h2, const PathSet& h1);

/// Noise variance for a target receiver-front-end SNR. Received power is
/// path_count * gram_trace / (fs * frame_duration); the returned value is
/// the per-sample complex noise variance.
double calibrate_noise_variance(double gram_trace, int path_count, double fs,
                                double frame_duration_s, double snr_db);

/// Complex white Gaussian noise, E|w|^2 = variance.
VecC awgn(Eigen::Index length, double variance, std::mt19937_64& rng);

void write_paths_csv(const PathSet& paths, const std::string& file);
PathSet read_paths_csv(const std::string& file);

}  // namespace odss::channel
