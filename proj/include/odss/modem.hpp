#pragma once

#include "odss/channel.hpp"
#include "odss/common.hpp"
#include "odss/waveforms.hpp"

namespace odss::modem {

/// ICI-free design point for a given bandwidth and channel spread.
struct OdssParams {
    double bandwidth_hz = 0.0;
    double tau_max_s = 0.0;
    double alpha_max = 1.0;
    double gamma = 2.0;
    double q = 1.0;
    int n_scales = 1;
    double w_hz = 0.0;       // transmit filter bandwidth
    double w_max_hz = 0.0;   // ICI-free upper bound on W
    int m_tot = 1;
    double eta = 0.0;        // symbols/s/Hz at the minimum symbol duration
    std::vector<int> row_sizes;

    double symbol_duration_s() const { return gamma / w_hz; }
};

/// One row of the parameter study; infeasible rows are flagged, not fatal.
struct DesignRow {
    double q = 1.0;
    double tau_max_s = 0.0;
    int n_scales = 0;
    double w_hz = 0.0;
    double w_max_hz = 0.0;
    int m_tot = 0;
    double eta = 0.0;
    bool feasible = false;
};

/// Maximum allowable transmit filter bandwidth (two-branch form).
double w_max_bound(double alpha_max, double tau_max_s, int n_scales);

/// Evaluates the design at a given sampling ratio q > 1: smallest N with
/// B(q-1)/(q^N - 1) < W_max, then W, M_tot and eta = M_tot * W / B.
DesignRow design_for_ratio(double bandwidth_hz, double tau_max_s, double alpha_max, double q,
                           int n_cap = 64);

/// Chooses q = alpha_max^2 and runs the N search; alpha_max = 1 degenerates
/// to q = 1, N = 1, W = 1/(2 tau_max) (the A-OFDM reduction).
OdssParams select_params(double bandwidth_hz, double tau_max_s, double alpha_max, double gamma);

/// Ragged 2D frame: row k holds M(k) complex entries, stored row-major.
/// Shapes are shared between the Mellin-Fourier symbol frame and the
/// delay-scale coefficient frame.
struct Frame {
    std::vector<int> row_sizes;
    VecC data;

    static Frame zero(const std::vector<int>& rows);
    int total() const { return static_cast<int>(data.size()); }
    int row_offset(int k) const;
    Complex& at(int k, int l) { return data[row_offset(k) + l]; }
    Complex at(int k, int l) const { return data[row_offset(k) + l]; }
};

using SymbolFrame = Frame;
using DelayScaleFrame = Frame;

std::vector<int> row_sizes_for(double q, int n_scales);

/// The 2D Mellin-Fourier -> delay-scale transform T_iMF and its numerically
/// verified inverse. Row/column order matches the bank lattice order
/// (scale-major). Construction fails if T is numerically singular or the
/// round-trip residual exceeds 1e-8.
struct OdssTransform {
    MatC forward;
    MatC inverse;
    double condition = 0.0;
    std::vector<int> row_sizes;

    static OdssTransform build(double q, int n_scales);
    int size() const { return static_cast<int>(forward.rows()); }
};

DelayScaleFrame odss_transform(const SymbolFrame& x, const OdssTransform& t);
SymbolFrame inverse_odss_transform(const DelayScaleFrame& z, const OdssTransform& t);

/// s = sum_{n,m} X[n,m] s_{m,n} = G X.
VecC modulate(const DelayScaleFrame& x, const waveforms::SubcarrierBank& bank);

/// Matched-filter bank: Yhat[n,m] = <s_{m,n}, r>, the cross-ambiguity
/// sampled on the lattice when g_rx = g_tx.
DelayScaleFrame demodulate(const VecC& r, const waveforms::SubcarrierBank& bank);

/// Column-by-column probe of a channel operator through the bank:
/// D_full(:,j) = demodulate(apply(g_j)). Identity channel gives the Gram.
MatC measure_channel_matrix(const waveforms::SubcarrierBank& bank,
                            const std::function<VecC(const VecC&)>& apply, int workers = 1);

/// Per-subcarrier complex gains of the one-tap channel model plus the
/// delay-scale-domain noise variance.
struct DiagChannel {
    VecC gains;
    double noise_variance = 0.0;
};

/// Fine-grid caches for evaluating path responses against every bank
/// waveform; build once per bank, reuse across channel draws.
class BankAmbiguity {
  public:
    BankAmbiguity(const waveforms::SubcarrierBank& bank, int oversample = 8);

    /// Diagonal gains of the discrete-path channel as seen through the
    /// matched-filter bank, path conventions identical to apply_channel
    /// (rational scale, fine-grid delay rounding, carrier rotation).
    VecC diag_gains(const channel::PathSet& paths, const channel::ResamplerConfig& cfg,
                    double carrier_hz) const;

  private:
    const waveforms::SubcarrierBank* bank_;
    std::vector<dsp::FineSignal> fine_;
};

/// Evaluates the per-lattice-point analytic gains of a discrete path set
/// via the sampled cross-ambiguity of each subcarrier with itself.
DiagChannel analytic_diag_gains(const channel::PathSet& paths,
                                const waveforms::SubcarrierBank& bank,
                                const channel::ResamplerConfig& cfg, double carrier_hz,
                                double noise_variance = 0.0);

/// Per-entry MMSE: z_i = conj(d_i) y_i / (|d_i|^2 + noise_var); 0/0 -> 0.
VecC mmse_equalize(const VecC& y, const VecC& d, double noise_variance);
DelayScaleFrame mmse_equalize(const DelayScaleFrame& y, const DiagChannel& d);

Complex slice(Complex v, const std::vector<Complex>& alphabet);

/// xhat = slice(T^{-1} z) against the constellation.
SymbolFrame decode_frame(const DelayScaleFrame& z, const OdssTransform& t,
                         const std::vector<Complex>& alphabet);

}  // namespace odss::modem
