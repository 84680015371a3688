#include "odss/mellin.hpp"

namespace odss::mellin {

GeometricGrid GeometricGrid::create(double q, int length, double alpha_lo, double alpha_hi) {
    if (!(alpha_lo > 0.0) || !(alpha_hi >= alpha_lo))
        throw std::invalid_argument("GeometricGrid: need 0 < alpha_lo <= alpha_hi");
    if (length < 1) throw std::invalid_argument("GeometricGrid: length must be >= 1");
    if (q < 1.0) throw std::invalid_argument("GeometricGrid: ratio q must be >= 1");
    if (q == 1.0 && length > 1)
        throw std::invalid_argument("GeometricGrid: q = 1 is only valid with N = 1");

    GeometricGrid g;
    g.q = q;
    g.length = length;
    g.alpha_lo = alpha_lo;
    g.alpha_hi = alpha_hi;
    g.start = (q == 1.0) ? 0 : static_cast<int>(std::floor(std::log(alpha_lo) / std::log(q)));
    if (q > 1.0 && g.dilatocycle_ratio() < alpha_hi / alpha_lo * (1.0 - 1e-12))
        throw std::invalid_argument("GeometricGrid: Q = q^N < alpha_hi/alpha_lo aliases the scale domain");
    return g;
}

int min_transform_length(double beta_span, double alpha_lo, double alpha_hi) {
    if (!(alpha_lo > 0.0) || !(alpha_hi >= alpha_lo))
        throw std::invalid_argument("min_transform_length: need 0 < alpha_lo <= alpha_hi");
    if (beta_span < 0.0) throw std::invalid_argument("min_transform_length: beta_span must be >= 0");
    const double bound = beta_span * std::log(alpha_hi / alpha_lo);
    int n = static_cast<int>(std::ceil(bound - 1e-12));
    return std::max(1, n);
}

MellinSpectrum forward_dmt(const VecC& samples, const GeometricGrid& grid) {
    const int n_len = grid.length;
    if (static_cast<int>(samples.size()) != n_len)
        throw std::invalid_argument("forward_dmt: sample count does not match grid length");

    MellinSpectrum spec;
    spec.coeffs = VecC::Zero(n_len);
    for (int k = 0; k < n_len; ++k) {
        Complex acc(0.0, 0.0);
        for (int i = 0; i < n_len; ++i) {
            const int n_abs = grid.start + i;
            const double amp = std::pow(grid.q, 0.5 * n_abs);
            acc += amp * samples[i] * unit_phasor(kTwoPi * n_abs * k / n_len);
        }
        spec.coeffs[k] = acc;
    }
    spec.beta_lo = 0.0;
    spec.beta_hi = (grid.q > 1.0) ? 1.0 / std::log(grid.q) : 0.0;
    return spec;
}

VecC inverse_dmt(const MellinSpectrum& spectrum, const GeometricGrid& grid) {
    const int n_len = grid.length;
    if (spectrum.length() != n_len)
        throw std::invalid_argument("inverse_dmt: spectrum length does not match grid length");

    VecC out = VecC::Zero(n_len);
    for (int i = 0; i < n_len; ++i) {
        const int n_abs = grid.start + i;
        Complex acc(0.0, 0.0);
        for (int k = 0; k < n_len; ++k)
            acc += spectrum.coeffs[k] * unit_phasor(-kTwoPi * k * n_abs / n_len);
        out[i] = acc * std::pow(grid.q, -0.5 * n_abs) / static_cast<double>(n_len);
    }
    return out;
}

}  // namespace odss::mellin
