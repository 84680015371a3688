#pragma once

#include "odss/common.hpp"

namespace odss::mellin {

/// Geometric sampling grid on the scale axis: points q^n for
/// n = J .. J+N-1, with J the integer part of ln(alpha_lo)/ln(q).
/// The dilatocycling ratio Q = q^N must cover the scale support,
/// Q >= alpha_hi/alpha_lo, or the scale domain aliases.
struct GeometricGrid {
    double q = 1.0;
    int length = 1;        // transform length N
    int start = 0;         // J
    double alpha_lo = 1.0;
    double alpha_hi = 1.0;

    static GeometricGrid create(double q, int length, double alpha_lo, double alpha_hi);

    double point(int i) const { return std::pow(q, start + i); }
    double dilatocycle_ratio() const { return std::pow(q, length); }
};

/// One period of the periodized Mellin spectrum, at bins beta_k = k/ln(Q).
struct MellinSpectrum {
    VecC coeffs;
    double beta_lo = 0.0;
    double beta_hi = 0.0;

    int length() const { return static_cast<int>(coeffs.size()); }
};

/// Smallest alias-free transform length for a given Mellin span and scale
/// support, N >= beta_span * ln(alpha_hi/alpha_lo), never less than 1.
int min_transform_length(double beta_span, double alpha_lo, double alpha_hi);

/// Discrete Mellin transform: coeffs[k] = sum_n q^{n/2} x(q^n) e^{j2 pi n k / N},
/// n running over the grid's absolute indices J..J+N-1.
MellinSpectrum forward_dmt(const VecC& samples, const GeometricGrid& grid);

/// Discrete inverse Mellin transform, exact inverse of forward_dmt:
/// x(q^n) = (q^{-n/2}/N) sum_k coeffs[k] e^{-j2 pi k n / N}.
VecC inverse_dmt(const MellinSpectrum& spectrum, const GeometricGrid& grid);

}  // namespace odss::mellin
