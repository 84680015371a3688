#pragma once

#include "odss/baselines.hpp"
#include "odss/channel.hpp"
#include "odss/common.hpp"
#include "odss/modem.hpp"
#include "odss/waveforms.hpp"

#include <string>

namespace odss::harness {

enum class Scheme { kOdss, kOtfs, kOfdm };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Full experiment description. Defaults reproduce the comparison setup:
/// 0-1280 Hz band at a 12.8 kHz carrier, dyadic ODSS bank (q=2, N=7,
/// T=1.9 s, 127 subcarriers), OFDM with a 2560-point grid mounting every
/// 20th bin, and an 8x16 OTFS grid, all BPSK.
struct ExperimentConfig {
    std::vector<Scheme> schemes = {Scheme::kOdss, Scheme::kOtfs, Scheme::kOfdm};
    double sample_rate_hz = 1280.0;
    double carrier_hz = 12800.0;
    double bandwidth_hz = 1280.0;
    channel::ChannelSpec chan{0.010, 1.001, 20};
    channel::ResamplerConfig resampler{};
    std::vector<double> snr_db = {0.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0};
    int trials = 200;
    std::uint64_t seed = 1;
    waveforms::WindowKind window = waveforms::WindowKind::kPhydyas;
    std::string out_dir = "out";
    int workers = 1;

    double odss_q = 2.0;
    int odss_scales = 7;
    double odss_symbol_s = 1.9;
    baselines::OtfsGrid otfs{};
    int ofdm_nfft = 2560;
    int ofdm_stride = 20;
    int active_subcarrier = 64;
};

/// Flat key=value config file ('#' comments). Unknown keys are an error.
ExperimentConfig load_config(const std::string& file);

struct BerRecord {
    std::string scheme;
    double snr_db = 0.0;
    int trials = 0;
    std::int64_t bits = 0;
    std::int64_t bit_errors = 0;
    double ber = 0.0;
    std::uint64_t seed = 0;
};

std::vector<BerRecord> run_ber_vs_snr(const ExperimentConfig& cfg);
std::vector<BerRecord> run_ber_vs_paths(const ExperimentConfig& cfg, const std::vector<int>& path_counts);
std::vector<BerRecord> run_ber_vs_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas);

void write_ber_csv(const std::vector<BerRecord>& records, const std::string& file);

struct IciRecord {
    std::string scheme;
    int seed_index = 0;
    int subcarrier = 0;
    double mag_raw_db = 0.0;  // matched-filter output magnitude
    double mag_eq_db = 0.0;   // after one-tap MMSE
};

/// Mounts a symbol on one subcarrier only and records the processed
/// outputs around it over noise-free channel draws.
std::vector<IciRecord> run_ici_probe(const ExperimentConfig& cfg, int active_index, int n_seeds = 100,
                                     int neighborhood = 5);
void write_ici_csv(const std::vector<IciRecord>& records, const std::string& file);

/// Measured channel matrices for one channel draw: ODSS delay-scale, ODSS
/// Mellin-Fourier (T^-1 D T), and OTFS time-frequency, as mag-dB grids
/// normalized to the per-matrix peak.
struct ChannelMatrices {
    MatC odss_delay_scale;
    MatC odss_mellin_fourier;
    MatC otfs_time_frequency;
};

ChannelMatrices measure_channel_matrices(const ExperimentConfig& cfg, std::uint64_t seed);
void export_channel_matrices(const ExperimentConfig& cfg, std::uint64_t seed,
                             const std::string& directory);
void write_matrix_db_csv(const MatC& matrix, const std::string& file);
void write_matrix_complex_csv(const MatC& matrix, const std::string& file);

/// Peak off-diagonal magnitude relative to the peak diagonal magnitude, dB.
double max_ici_db(const MatC& matrix);

struct SpectrumPoint {
    int subcarrier;
    double freq_hz;
    double power_db;
};

std::vector<SpectrumPoint> compute_spectra(const waveforms::SubcarrierBank& bank, int nfft = 4096);
void export_spectra(const ExperimentConfig& cfg, const std::string& directory);

std::vector<modem::DesignRow> run_param_study(double bandwidth_hz,
                                              const std::vector<double>& tau_max_list,
                                              double alpha_max, double gamma,
                                              const std::vector<double>& q_grid);
void write_study_csv(const std::vector<modem::DesignRow>& rows, const std::string& file);

/// The dyadic demo bank used for all signal-level experiments.
waveforms::SubcarrierBank make_odss_bank(const ExperimentConfig& cfg);

/// One scheme's transmit/receive machinery, built once and reused across
/// trials. Equalizer gains come from the analytic per-path diagonal, which
/// matches matched-filter probing to the interpolation tolerance.
class SchemeEngine {
  public:
    SchemeEngine(Scheme scheme, const ExperimentConfig& cfg);

    Scheme scheme() const { return scheme_; }
    int bits_per_frame() const { return bits_per_frame_; }
    const waveforms::SubcarrierBank& bank() const { return bank_; }
    const modem::OdssTransform& transform() const { return transform_; }

    struct TrialResult {
        std::int64_t bits = 0;
        std::int64_t errors = 0;
    };

    TrialResult run_trial(const channel::ChannelSpec& chan, double snr_db,
                          std::uint64_t trial_seed) const;

    /// Noise-free single-active-subcarrier probe; returns matched-filter
    /// outputs and equalized outputs over the whole grid.
    void probe(const channel::PathSet& paths, int active_index, VecC& raw, VecC& equalized) const;

    VecC diag_gains(const channel::PathSet& paths) const;

  private:
    Scheme scheme_;
    ExperimentConfig cfg_;
    waveforms::SubcarrierBank bank_;
    modem::OdssTransform transform_;  // ODSS only
    MatC mounting_;                   // unitary Mellin-Fourier mounting, ODSS only
    baselines::OfdmConfig ofdm_;
    std::unique_ptr<modem::BankAmbiguity> ambiguity_;
    int bits_per_frame_ = 0;
};

/// Nearest unitary (polar factor) of the column-normalized T_iMF. The
/// literal transform normalization is far from energy preserving, which
/// would contradict the SNR calibration the comparison rests on; symbols
/// are mounted through this unitary Mellin-Fourier map instead.
MatC unitary_mounting(const modem::OdssTransform& transform);

}  // namespace odss::harness
