#pragma once

#include "odss/channel.hpp"
#include "odss/common.hpp"
#include "odss/modem.hpp"
#include "odss/waveforms.hpp"

namespace odss::baselines {

/// OTFS lattice: N frequency/Doppler bins spaced delta_f, M time slots of
/// duration T. Delay and Doppler resolutions follow 1/(N delta_f), 1/(M T).
/// The comparison default mounts the same 10 Hz grid as OFDM (128 bins per
/// 2 s slot), giving equal spectral efficiency for any slot count.
struct OtfsGrid {
    int n_bins = 128;  // frequency axis (Doppler side of the DD grid)
    int m_slots = 4;   // time axis (delay side of the DD grid)
    double slot_duration_s = 2.0;
    double delta_f_hz = 10.0;

    double delay_resolution_s() const { return 1.0 / (n_bins * delta_f_hz); }
    double doppler_resolution_hz() const { return 1.0 / (m_slots * slot_duration_s); }
    int total() const { return n_bins * m_slots; }
};

/// ISFFT: X[n,m] = (1/NM) sum_{k,l} x[k,l] e^{j2pi(nk/N - ml/M)};
/// grids are N x M with row = frequency/Doppler index, column = time/delay.
MatC isfft(const MatC& dd);

/// SFFT, the exact (unnormalized) inverse of isfft.
MatC sfft(const MatC& tf);

/// OTFS modulation bank: waveform (n,m) is g(t - mT) e^{j2pi n delta_f (t-mT)}
/// with a unit-energy pulse of the slot duration. Column order n + N*m.
waveforms::SubcarrierBank build_otfs_bank(const OtfsGrid& grid, double sample_rate_hz,
                                          waveforms::WindowKind window);

VecC otfs_modulate(const MatC& tf, const waveforms::SubcarrierBank& bank);
MatC otfs_demodulate(const VecC& r, const waveforms::SubcarrierBank& bank, const OtfsGrid& grid);

/// OFDM per the comparison configuration: n_fft bins at fs, every
/// `used_stride`-th bin mounted, pulse-shaped by the window over the
/// whole frame. No cyclic prefix; reception is by matched projection.
struct OfdmConfig {
    int n_fft = 2560;
    int used_stride = 20;
    double sample_rate_hz = 1280.0;
    waveforms::WindowKind window = waveforms::WindowKind::kPhydyas;

    int used_bins() const { return n_fft / used_stride; }
    double bin_spacing_hz() const { return sample_rate_hz / n_fft; }
    double used_spacing_hz() const { return bin_spacing_hz() * used_stride; }
};

waveforms::SubcarrierBank build_ofdm_bank(const OfdmConfig& cfg);

VecC ofdm_modulate(const VecC& symbols, const waveforms::SubcarrierBank& bank);
VecC ofdm_demodulate(const VecC& r, const waveforms::SubcarrierBank& bank);

/// Shared-window fast path for the OFDM per-bin channel gains; identical
/// result to modem::analytic_diag_gains but one window resampling per path.
VecC ofdm_diag_gains(const OfdmConfig& cfg, const waveforms::SubcarrierBank& bank,
                     const channel::PathSet& paths, const channel::ResamplerConfig& rcfg,
                     double carrier_hz);

/// Same shared-window evaluation per slot for the OTFS bank.
VecC otfs_diag_gains(const OtfsGrid& grid, const waveforms::SubcarrierBank& bank,
                     const channel::PathSet& paths, const channel::ResamplerConfig& rcfg,
                     double carrier_hz);

/// Narrowband (delay-Doppler) path for the twisted-convolution cascade law.
struct NbPath {
    Complex gain{1.0, 0.0};
    double delay_s = 0.0;
    double doppler_hz = 0.0;
};

using NbPathSet = std::vector<NbPath>;

/// Twisted convolution of discrete path sets: pairwise sums of delays and
/// Dopplers with the twist phase e^{j2pi nu2 tau1} on the gains.
NbPathSet twisted_convolve(const NbPathSet& h2, const NbPathSet& h1);

/// Narrowband channel application (exact for on-grid delays):
/// r(t) = sum_p g_p s(t - tau_p) e^{j2pi nu_p (t - tau_p)}.
VecC apply_narrowband(const VecC& s, const NbPathSet& paths, double fs);

/// Subcarrier-by-subcarrier MMSE, shared with the ODSS receiver.
inline VecC onetap_mmse(const VecC& y, const VecC& d, double noise_variance) {
    return modem::mmse_equalize(y, d, noise_variance);
}

}  // namespace odss::baselines
