#include "odss/resample.hpp"

#include <unsupported/Eigen/FFT>

namespace odss::dsp {

double kaiser_i0(double x) {
    // power-series I0, converges quickly for the beta values used here
    double sum = 1.0, term = 1.0;
    const double q = 0.25 * x * x;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

Rational approximate_ratio(double x, double tol, std::int64_t max_den) {
    if (!(x > 0.0)) throw std::invalid_argument("approximate_ratio: ratio must be positive");
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = x;
    Rational best{static_cast<std::int64_t>(std::llround(x)), 1};
    for (int iter = 0; iter < 64; ++iter) {
        const double a_f = std::floor(frac);
        const std::int64_t a = static_cast<std::int64_t>(a_f);
        const std::int64_t p2 = a * p1 + p0;
        const std::int64_t q2 = a * q1 + q0;
        if (q2 > max_den || q2 <= 0) break;
        best = {p2, q2};
        if (std::abs(best.value() - x) <= 1e-15 * std::abs(x)) break;
        const double rem = frac - a_f;
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    }
    if (std::abs(best.value() - x) > tol)
        throw std::runtime_error("approximate_ratio: no rational approximation within tolerance");
    return best;
}

SincInterpolator::SincInterpolator(int taps, double kaiser_beta, int table_phases)
    : taps_(taps), half_((taps - 1) / 2), phases_(table_phases) {
    if (taps < 3 || taps % 2 == 0) throw std::invalid_argument("SincInterpolator: taps must be odd and >= 3");
    const double i0b = kaiser_i0(kaiser_beta);
    table_.resize(static_cast<size_t>(phases_ + 1) * taps_);
    for (int p = 0; p <= phases_; ++p) {
        const double frac = static_cast<double>(p) / phases_;
        for (int k = 0; k < taps_; ++k) {
            const double t = static_cast<double>(k - half_) - frac;
            double sinc = 1.0;
            if (t != 0.0) sinc = std::sin(kPi * t) / (kPi * t);
            const double u = t / (half_ + 1.0);
            double w = 0.0;
            if (std::abs(u) <= 1.0) w = kaiser_i0(kaiser_beta * std::sqrt(1.0 - u * u)) / i0b;
            table_[static_cast<size_t>(p) * taps_ + k] = sinc * w;
        }
    }
}

Complex SincInterpolator::sample_split(const VecC& x, std::int64_t idx, double frac) const {
    const double pf = frac * phases_;
    const int p0 = std::min(static_cast<int>(pf), phases_ - 1);
    const double blend = pf - p0;
    const double* row0 = &table_[static_cast<size_t>(p0) * taps_];
    const double* row1 = row0 + taps_;
    Complex acc(0.0, 0.0);
    const std::int64_t n = x.size();
    for (int k = 0; k < taps_; ++k) {
        const std::int64_t j = idx - half_ + k;
        if (j < 0 || j >= n) continue;
        const double w = row0[k] + blend * (row1[k] - row0[k]);
        acc += w * x[j];
    }
    return acc;
}

Complex SincInterpolator::sample(const VecC& x, double pos) const {
    const double fl = std::floor(pos);
    return sample_split(x, static_cast<std::int64_t>(fl), pos - fl);
}

VecC fft_upsample(const VecC& x, int factor, int guard) {
    if (factor < 1) throw std::invalid_argument("fft_upsample: factor must be >= 1");
    if (factor == 1) return x;
    const int n = static_cast<int>(x.size());
    int padded = n + guard;
    int pow2 = 1;
    while (pow2 < padded) pow2 <<= 1;
    padded = pow2;

    Eigen::FFT<double> fft;
    std::vector<Complex> in(static_cast<size_t>(padded), Complex(0, 0));
    for (int i = 0; i < n; ++i) in[static_cast<size_t>(i)] = x[i];
    std::vector<Complex> spec(static_cast<size_t>(padded));
    fft.fwd(spec, in);

    // one-sided band [0, fs): keep bins 0..padded-1 at the bottom of the
    // stretched spectrum, zero elsewhere
    std::vector<Complex> spec_up(static_cast<size_t>(padded) * factor, Complex(0, 0));
    for (int i = 0; i < padded; ++i) spec_up[static_cast<size_t>(i)] = spec[static_cast<size_t>(i)];
    std::vector<Complex> fine_full;
    fft.inv(fine_full, spec_up);

    // Eigen's inverse scales by the stretched length; undo the extra 1/factor
    VecC out(static_cast<std::int64_t>(n) * factor);
    for (std::int64_t i = 0; i < out.size(); ++i)
        out[i] = fine_full[static_cast<size_t>(i)] * static_cast<double>(factor);
    return out;
}

FineSignal::FineSignal(const VecC& x, int oversample, const SincInterpolator& interp)
    : fine_(fft_upsample(x, oversample, 2 * interp.taps())), os_(oversample), interp_(&interp) {}

Complex FineSignal::at(double t) const {
    const double pos = t * os_;
    const double fl = std::floor(pos);
    return interp_->sample_split(fine_, static_cast<std::int64_t>(fl), pos - fl);
}

Complex FineSignal::at_fine_rational(std::int64_t num, std::int64_t den) const {
    std::int64_t idx = num / den;
    std::int64_t rem = num % den;
    if (rem < 0) {
        idx -= 1;
        rem += den;
    }
    return interp_->sample_split(fine_, idx, static_cast<double>(rem) / static_cast<double>(den));
}

}  // namespace odss::dsp
