#pragma once

#include "odss/common.hpp"
#include "odss/resample.hpp"

#include <memory>
#include <string>

namespace odss::waveforms {

/// Chirplet prototype in normalized frequency units: a linear sweep from
/// f1 = 1/sqrt(q) to f2 = sqrt(q) over the pulse duration.
struct ChirpletSpec {
    double q = 2.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double duration_s = 1.0;
    double sample_rate_hz = 8.0;

    static ChirpletSpec create(double q, double duration_s, double sample_rate_hz);
    double kappa() const { return (f2 - f1) / duration_s; }
};

/// g0(t) = exp(j 2 pi (f1 t + kappa t^2 / 2)) sampled on [0, T).
VecC chirplet(const ChirpletSpec& spec);

enum class WindowKind { kRectangular, kPhydyas };

/// PHYDYAS reference filter coefficients for overlap factor K.
struct PhydyasWindow {
    int overlap = 3;
    VecD coeffs;  // A[1..K-1], stored from index 0

    static PhydyasWindow reference_k3();

    /// g_w(t) = 1 + 2 sum_k (-1)^k A[k] cos(2 pi k t / period).
    double value(double t, double period) const;
};

/// Window samples on an arbitrary time grid.
VecD phydyas_window(const PhydyasWindow& window, const VecD& t_grid, double period);

/// One subcarrier's lattice coordinates and placement inside the frame.
struct LatticePoint {
    int n = 0;             // scale index (ODSS) / frequency index (OTFS) / 0 (OFDM)
    int m = 0;             // shift index / time slot / bin index
    double delay_s = 0.0;  // lattice delay m / (q^n W)
    double scale = 1.0;    // q^n
    double freq_lo_hz = 0.0;
    double freq_hi_hz = 0.0;
    int start = 0;   // first nonzero sample
    int length = 0;  // support length in samples
    double raw_energy = 0.0;  // discrete energy before unit normalization
};

/// Sampled bank of modulation waveforms on a common frame grid. Columns of
/// `waveforms` are unit-energy. Used for ODSS chirplet banks and reused by
/// the OFDM/OTFS baselines, which differ only in how columns are built.
struct SubcarrierBank {
    MatC waveforms;  // frame_length x M_tot
    std::vector<LatticePoint> lattice;
    double sample_rate_hz = 0.0;
    double frame_duration_s = 0.0;
    int frame_length = 0;
    double q = 1.0;
    int n_scales = 1;
    double lattice_w_hz = 0.0;  // shift spacing parameter W
    double base_freq_hz = 0.0;  // chirp start frequency at scale 0
    WindowKind window = WindowKind::kPhydyas;

    int size() const { return static_cast<int>(waveforms.cols()); }
    double gram_trace() const { return static_cast<double>(size()); }
};

/// ODSS bank configuration. The chirplet at scale 0 sweeps
/// [base_freq, q*base_freq] Hz over pulse_duration seconds; scale n
/// compresses it q^n-fold and mounts floor(q^n) copies at delays
/// m / (q^n * lattice_w).
struct OdssBankConfig {
    double q = 2.0;
    int n_scales = 7;
    double base_freq_hz = 10.0;
    double lattice_w_hz = 1.0 / 1.9;
    double pulse_duration_s = 1.9;
    double sample_rate_hz = 1280.0;
    WindowKind window = WindowKind::kPhydyas;

    /// Band-filling construction: subcarriers tile [band_hz/q^N, band_hz].
    static OdssBankConfig for_band(double q, int n_scales, double band_hz, double lattice_w_hz,
                                   double pulse_duration_s, double sample_rate_hz,
                                   WindowKind window = WindowKind::kPhydyas);
};

SubcarrierBank build_bank(const OdssBankConfig& cfg);

/// Number of shifts at scale n, M(n) = floor(q^n).
int shifts_at_scale(double q, int n);

/// Closed-form ODSS subcarrier evaluation (zero outside its support).
/// Exact counterpart of the sampled bank columns, before normalization.
Complex eval_subcarrier(const OdssBankConfig& cfg, const LatticePoint& p, double t_s);

struct AmbiguityConfig {
    int oversample = 8;
    int taps = 31;
    double kaiser_beta = 14.0;
};

/// Wideband cross-ambiguity A_{g,r}(tau, alpha) =
///   sqrt(alpha) * sum_t g*(alpha(t - tau)) r(t),
/// a plain discrete sum so that A(0,1) equals the pulse energy exactly.
/// g is evaluated at scaled positions by band-limited interpolation; an
/// optional frequency offset multiplies r by exp(j 2 pi nu t).
class AmbiguityEvaluator {
  public:
    AmbiguityEvaluator(const VecC& g_rx, double sample_rate_hz, const AmbiguityConfig& cfg = {});

    Complex operator()(const VecC& r, double tau_s, double alpha, double freq_offset_hz = 0.0) const;

  private:
    std::shared_ptr<const dsp::SincInterpolator> custom_interp_;
    dsp::FineSignal fine_;
    double fs_;
    int g_len_;
    int margin_;
};

Complex cross_ambiguity(const VecC& g_rx, const VecC& r, double tau_s, double alpha,
                        double sample_rate_hz, const AmbiguityConfig& cfg = {});

/// Hermitian Gram matrix of the bank waveforms (unit diagonal for
/// unit-energy columns).
MatC correlation_matrix(const SubcarrierBank& bank);

/// Largest off-diagonal correlation magnitude, in dB relative to the peak.
double max_offdiag_db(const MatC& gram);

/// Raw waveform export: one little-endian float32 (re, im) file per
/// subcarrier plus a text sidecar with the sampling and lattice metadata.
void write_bank_raw(const SubcarrierBank& bank, const std::string& directory);

const dsp::SincInterpolator& default_interpolator();

}  // namespace odss::waveforms
