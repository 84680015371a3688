#pragma once

#include "odss/common.hpp"

namespace odss::dsp {

/// Rational approximation p/q of a resampling ratio.
struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Best continued-fraction convergent of x with denominator <= max_den.
/// Throws if no convergent lands within tol of x.
Rational approximate_ratio(double x, double tol, std::int64_t max_den);

/// Interpolating windowed-sinc kernel (Kaiser window). The kernel is exact at
/// integer offsets (h(0)=1, h(k)=0), so on-grid reads pass through unchanged.
/// Fractional offsets are served from a polyphase table with linear blending.
class SincInterpolator {
  public:
    explicit SincInterpolator(int taps = 31, double kaiser_beta = 14.0, int table_phases = 4096);

    int taps() const { return taps_; }
    int half_width() const { return half_; }

    /// Evaluates x at continuous position pos (in samples). Samples outside
    /// [0, x.size()) are treated as zero.
    Complex sample(const VecC& x, double pos) const;

    /// Same, with the fractional split already done: pos = idx + frac, frac in [0,1).
    Complex sample_split(const VecC& x, std::int64_t idx, double frac) const;

  private:
    int taps_;
    int half_;
    int phases_;
    std::vector<double> table_;  // (phases_+1) x taps_
};

/// Upsamples a complex baseband signal by an integer factor using FFT
/// zero-padding. The signal's spectral content is taken one-sided in
/// [0, fs), which matches the 0..B subcarrier layout used throughout.
/// Values at the original sample positions are preserved exactly.
VecC fft_upsample(const VecC& x, int factor, int guard = 64);

/// A signal resampled onto a fine grid for band-limited evaluation at
/// arbitrary continuous positions (in units of the original sample index).
class FineSignal {
  public:
    FineSignal() = default;
    FineSignal(const VecC& x, int oversample, const SincInterpolator& interp);

    int oversample() const { return os_; }

    /// Value at continuous coarse-sample position t (t = seconds * fs).
    Complex at(double t) const;

    /// Value at the exact rational fine position num/den (fine-grid units).
    Complex at_fine_rational(std::int64_t num, std::int64_t den) const;

  private:
    VecC fine_;
    int os_ = 1;
    const SincInterpolator* interp_ = nullptr;
};

double kaiser_i0(double x);

}  // namespace odss::dsp
