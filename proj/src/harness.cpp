#include "odss/harness.hpp"

#include <unsupported/Eigen/FFT>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace odss::harness {

namespace {

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void ensure_parent_dir(const std::string& file) {
    const auto parent = std::filesystem::path(file).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

}  // namespace

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::kOdss: return "odss";
        case Scheme::kOtfs: return "otfs";
        case Scheme::kOfdm: return "ofdm";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "odss") return Scheme::kOdss;
    if (name == "otfs") return Scheme::kOtfs;
    if (name == "ofdm") return Scheme::kOfdm;
    throw std::invalid_argument("unknown scheme: " + name);
}

ExperimentConfig load_config(const std::string& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot open config file: " + file);
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) continue;

        if (key == "schemes") {
            cfg.schemes.clear();
            for (const auto& s : split(val, ',')) cfg.schemes.push_back(scheme_from_name(s));
        } else if (key == "fs_hz") cfg.sample_rate_hz = std::stod(val);
        else if (key == "fc_hz") cfg.carrier_hz = std::stod(val);
        else if (key == "bandwidth_hz") cfg.bandwidth_hz = std::stod(val);
        else if (key == "tau_max_s") cfg.chan.tau_max_s = std::stod(val);
        else if (key == "alpha_max") cfg.chan.alpha_max = std::stod(val);
        else if (key == "paths") cfg.chan.paths = std::stoi(val);
        else if (key == "snr_db") {
            cfg.snr_db.clear();
            for (const auto& s : split(val, ',')) cfg.snr_db.push_back(std::stod(s));
        } else if (key == "trials") cfg.trials = std::stoi(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "window") {
            if (val == "phydyas") cfg.window = waveforms::WindowKind::kPhydyas;
            else if (val == "rect" || val == "rectangular") cfg.window = waveforms::WindowKind::kRectangular;
            else throw std::runtime_error("config: unknown window " + val);
        } else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "workers") cfg.workers = std::stoi(val);
        else if (key == "odss_q") cfg.odss_q = std::stod(val);
        else if (key == "odss_scales") cfg.odss_scales = std::stoi(val);
        else if (key == "odss_symbol_s") cfg.odss_symbol_s = std::stod(val);
        else if (key == "otfs_bins") cfg.otfs.n_bins = std::stoi(val);
        else if (key == "otfs_slots") cfg.otfs.m_slots = std::stoi(val);
        else if (key == "ofdm_nfft") cfg.ofdm_nfft = std::stoi(val);
        else if (key == "ofdm_stride") cfg.ofdm_stride = std::stoi(val);
        else if (key == "oversample") cfg.resampler.oversample = std::stoi(val);
        else if (key == "rational_tol") cfg.resampler.rational_tol = std::stod(val);
        else if (key == "active_subcarrier") cfg.active_subcarrier = std::stoi(val);
        else throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key " + key);
    }
    // keep the OTFS grid consistent with the band: one OFDM-length block
    // per slot, bins covering the band
    cfg.otfs.slot_duration_s = cfg.ofdm_nfft / cfg.sample_rate_hz;
    cfg.otfs.delta_f_hz = cfg.bandwidth_hz / cfg.otfs.n_bins;
    return cfg;
}

waveforms::SubcarrierBank make_odss_bank(const ExperimentConfig& cfg) {
    const auto bank_cfg = waveforms::OdssBankConfig::for_band(
        cfg.odss_q, cfg.odss_scales, cfg.bandwidth_hz, 1.0 / cfg.odss_symbol_s, cfg.odss_symbol_s,
        cfg.sample_rate_hz, cfg.window);
    return waveforms::build_bank(bank_cfg);
}

MatC unitary_mounting(const modem::OdssTransform& transform) {
    const int m = transform.size();
    MatC loaded = transform.forward;
    for (int j = 0; j < m; ++j) loaded.col(j) /= loaded.col(j).norm();
    Eigen::JacobiSVD<MatC> svd(loaded, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

SchemeEngine::SchemeEngine(Scheme scheme, const ExperimentConfig& cfg) : scheme_(scheme), cfg_(cfg) {
    switch (scheme) {
        case Scheme::kOdss: {
            bank_ = make_odss_bank(cfg);
            transform_ = modem::OdssTransform::build(cfg.odss_q, cfg.odss_scales);
            mounting_ = unitary_mounting(transform_);
            ambiguity_ = std::make_unique<modem::BankAmbiguity>(bank_, cfg.resampler.oversample);
            bits_per_frame_ = bank_.size();
            break;
        }
        case Scheme::kOtfs: {
            bank_ = baselines::build_otfs_bank(cfg.otfs, cfg.sample_rate_hz, cfg.window);
            bits_per_frame_ = bank_.size();
            break;
        }
        case Scheme::kOfdm: {
            ofdm_ = baselines::OfdmConfig{cfg.ofdm_nfft, cfg.ofdm_stride, cfg.sample_rate_hz, cfg.window};
            bank_ = baselines::build_ofdm_bank(ofdm_);
            bits_per_frame_ = bank_.size();
            break;
        }
    }
}

VecC SchemeEngine::diag_gains(const channel::PathSet& paths) const {
    switch (scheme_) {
        case Scheme::kOfdm:
            return baselines::ofdm_diag_gains(ofdm_, bank_, paths, cfg_.resampler, cfg_.carrier_hz);
        case Scheme::kOtfs:
            return baselines::otfs_diag_gains(cfg_.otfs, bank_, paths, cfg_.resampler, cfg_.carrier_hz);
        case Scheme::kOdss:
            break;
    }
    return ambiguity_->diag_gains(paths, cfg_.resampler, cfg_.carrier_hz);
}

SchemeEngine::TrialResult SchemeEngine::run_trial(const channel::ChannelSpec& chan, double snr_db,
                                                  std::uint64_t trial_seed) const {
    const int n_sym = bank_.size();
    const channel::PathSet paths = channel::draw_paths(chan, derive_seed(trial_seed, 0xA1));

    std::mt19937_64 bit_rng(derive_seed(trial_seed, 0xB2));
    std::vector<int> bits(n_sym);
    VecC symbols(n_sym);
    for (int i = 0; i < n_sym; ++i) {
        bits[i] = static_cast<int>(bit_rng() & 1ULL);
        symbols[i] = Complex(bits[i] ? -1.0 : 1.0, 0.0);
    }

    // mount to the waveform-domain frame
    VecC x_wave;
    switch (scheme_) {
        case Scheme::kOdss:
            x_wave = mounting_ * symbols;
            break;
        case Scheme::kOtfs: {
            MatC dd = Eigen::Map<const MatC>(symbols.data(), cfg_.otfs.n_bins, cfg_.otfs.m_slots);
            MatC tf = baselines::isfft(dd) * std::sqrt(static_cast<double>(cfg_.otfs.total()));
            x_wave = Eigen::Map<const VecC>(tf.data(), tf.size());
            break;
        }
        case Scheme::kOfdm:
            x_wave = symbols;
            break;
    }

    const VecC s = bank_.waveforms * x_wave;
    VecC r = channel::apply_channel(s, paths, cfg_.resampler, cfg_.sample_rate_hz, cfg_.carrier_hz);

    const double noise_var = channel::calibrate_noise_variance(
        bank_.gram_trace(), chan.paths, cfg_.sample_rate_hz, bank_.frame_duration_s, snr_db);
    if (noise_var > 0.0) {
        std::mt19937_64 noise_rng(derive_seed(trial_seed, 0xC3));
        r += channel::awgn(r.size(), noise_var, noise_rng);
    }

    const VecC y = modem::demodulate(r, bank_).data;
    const VecC d = diag_gains(paths);
    // one-tap MMSE against the total per-bin disturbance: thermal noise
    // plus the ICI floor estimated from the demodulated power excess.
    // OFDM decisions are invariant to this (positive per-bin scaling);
    // it lets the spread schemes weight unreliable bins down.
    const double excess = (y.squaredNorm() - d.squaredNorm()) / n_sym - noise_var;
    const double sigma_eff = noise_var + std::max(0.0, excess);
    const VecC z = modem::mmse_equalize(y, d, sigma_eff);

    // demount and slice
    VecC soft(n_sym);
    switch (scheme_) {
        case Scheme::kOdss:
            soft = mounting_.adjoint() * z;
            break;
        case Scheme::kOtfs: {
            MatC tf = Eigen::Map<const MatC>(z.data(), cfg_.otfs.n_bins, cfg_.otfs.m_slots);
            MatC dd = baselines::sfft(tf) / std::sqrt(static_cast<double>(cfg_.otfs.total()));
            soft = Eigen::Map<const VecC>(dd.data(), dd.size());
            break;
        }
        case Scheme::kOfdm:
            soft = z;
            break;
    }

    TrialResult res;
    res.bits = n_sym;
    for (int i = 0; i < n_sym; ++i) {
        const int hat = (soft[i].real() < 0.0) ? 1 : 0;
        if (hat != bits[i]) ++res.errors;
    }
    return res;
}

void SchemeEngine::probe(const channel::PathSet& paths, int active_index, VecC& raw,
                         VecC& equalized) const {
    if (active_index < 0 || active_index >= bank_.size())
        throw std::invalid_argument("probe: active subcarrier out of range");
    VecC x = VecC::Zero(bank_.size());
    x[active_index] = Complex(1.0, 0.0);
    const VecC s = bank_.waveforms * x;
    const VecC r =
        channel::apply_channel(s, paths, cfg_.resampler, cfg_.sample_rate_hz, cfg_.carrier_hz);
    raw = modem::demodulate(r, bank_).data;
    const VecC d = diag_gains(paths);
    equalized = modem::mmse_equalize(raw, d, 0.0);
}

namespace {

BerRecord run_point(const SchemeEngine& engine, const ExperimentConfig& cfg,
                    const channel::ChannelSpec& chan, double snr_db, std::uint64_t point_tag) {
    std::vector<SchemeEngine::TrialResult> results(cfg.trials);
    std::vector<std::string> failures(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](int t) {
        std::uint64_t trial_seed = derive_seed(cfg.seed, point_tag, static_cast<std::uint64_t>(t));
        for (int attempt = 0; attempt <= 3; ++attempt) {
            try {
                results[t] = engine.run_trial(chan, snr_db, trial_seed);
                failures[t].clear();
                break;
            } catch (const std::exception& e) {
                failures[t] = e.what();
                trial_seed = derive_seed(trial_seed, 0xEE, attempt);  // redraw
            }
        }
    });
    for (const auto& f : failures)
        if (!f.empty()) throw std::runtime_error("trial failed after retries: " + f);
    BerRecord rec;
    rec.scheme = scheme_name(engine.scheme());
    rec.snr_db = snr_db;
    rec.trials = cfg.trials;
    rec.seed = cfg.seed;
    for (const auto& r : results) {
        rec.bits += r.bits;
        rec.bit_errors += r.errors;
    }
    rec.ber = (rec.bits > 0) ? static_cast<double>(rec.bit_errors) / rec.bits : 0.0;
    return rec;
}

std::uint64_t point_tag(Scheme s, int point_index) {
    return (static_cast<std::uint64_t>(s) + 1) * 1000003ULL + point_index;
}

}  // namespace

std::vector<BerRecord> run_ber_vs_snr(const ExperimentConfig& cfg) {
    std::vector<BerRecord> out;
    for (Scheme s : cfg.schemes) {
        SchemeEngine engine(s, cfg);
        for (size_t i = 0; i < cfg.snr_db.size(); ++i)
            out.push_back(run_point(engine, cfg, cfg.chan, cfg.snr_db[i], point_tag(s, static_cast<int>(i))));
    }
    return out;
}

std::vector<BerRecord> run_ber_vs_paths(const ExperimentConfig& cfg,
                                        const std::vector<int>& path_counts) {
    if (cfg.snr_db.empty()) throw std::invalid_argument("run_ber_vs_paths: SNR list is empty");
    std::vector<BerRecord> out;
    for (Scheme s : cfg.schemes) {
        SchemeEngine engine(s, cfg);
        for (size_t i = 0; i < path_counts.size(); ++i) {
            channel::ChannelSpec chan = cfg.chan;
            chan.paths = path_counts[i];
            out.push_back(run_point(engine, cfg, chan, cfg.snr_db.front(), point_tag(s, static_cast<int>(i))));
        }
    }
    return out;
}

std::vector<BerRecord> run_ber_vs_alpha(const ExperimentConfig& cfg,
                                        const std::vector<double>& alphas) {
    if (cfg.snr_db.empty()) throw std::invalid_argument("run_ber_vs_alpha: SNR list is empty");
    std::vector<BerRecord> out;
    for (Scheme s : cfg.schemes) {
        SchemeEngine engine(s, cfg);
        for (size_t i = 0; i < alphas.size(); ++i) {
            channel::ChannelSpec chan = cfg.chan;
            chan.alpha_max = alphas[i];
            out.push_back(run_point(engine, cfg, chan, cfg.snr_db.front(), point_tag(s, static_cast<int>(i))));
        }
    }
    return out;
}

void write_ber_csv(const std::vector<BerRecord>& records, const std::string& file) {
    ensure_parent_dir(file);
    std::ofstream f(file);
    f << "scheme,snr_db,trials,bits,bit_errors,ber,seed\n";
    for (const auto& r : records)
        f << r.scheme << "," << format_double(r.snr_db) << "," << r.trials << "," << r.bits << ","
          << r.bit_errors << "," << format_double(r.ber) << "," << r.seed << "\n";
}

std::vector<IciRecord> run_ici_probe(const ExperimentConfig& cfg, int active_index, int n_seeds,
                                     int neighborhood) {
    std::vector<IciRecord> out;
    for (Scheme s : cfg.schemes) {
        SchemeEngine engine(s, cfg);
        if (active_index >= engine.bank().size())
            throw std::invalid_argument("run_ici_probe: active subcarrier out of range for " +
                                        scheme_name(s));
        for (int seed_idx = 0; seed_idx < n_seeds; ++seed_idx) {
            const auto paths =
                channel::draw_paths(cfg.chan, derive_seed(cfg.seed, 0x1C1, seed_idx));
            VecC raw, eq;
            engine.probe(paths, active_index, raw, eq);
            const int lo = std::max(0, active_index - neighborhood);
            const int hi = std::min<int>(engine.bank().size() - 1, active_index + neighborhood);
            for (int j = lo; j <= hi; ++j) {
                IciRecord rec;
                rec.scheme = scheme_name(s);
                rec.seed_index = seed_idx;
                rec.subcarrier = j;
                rec.mag_raw_db = db20(std::abs(raw[j]) + 1e-300);
                rec.mag_eq_db = db20(std::abs(eq[j]) + 1e-300);
                out.push_back(rec);
            }
        }
    }
    return out;
}

void write_ici_csv(const std::vector<IciRecord>& records, const std::string& file) {
    ensure_parent_dir(file);
    std::ofstream f(file);
    f << "scheme,seed,subcarrier,mag_raw_db,mag_eq_db\n";
    for (const auto& r : records)
        f << r.scheme << "," << r.seed_index << "," << r.subcarrier << ","
          << format_double(r.mag_raw_db) << "," << format_double(r.mag_eq_db) << "\n";
}

ChannelMatrices measure_channel_matrices(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto paths = channel::draw_paths(cfg.chan, seed);
    const auto apply = [&](const VecC& s) {
        return channel::apply_channel(s, paths, cfg.resampler, cfg.sample_rate_hz, cfg.carrier_hz);
    };

    ChannelMatrices m;
    const auto odss_bank = make_odss_bank(cfg);
    m.odss_delay_scale = modem::measure_channel_matrix(odss_bank, apply, cfg.workers);
    const auto transform = modem::OdssTransform::build(cfg.odss_q, cfg.odss_scales);
    m.odss_mellin_fourier = transform.inverse * m.odss_delay_scale * transform.forward;

    const auto otfs_bank = baselines::build_otfs_bank(cfg.otfs, cfg.sample_rate_hz, cfg.window);
    m.otfs_time_frequency = modem::measure_channel_matrix(otfs_bank, apply, cfg.workers);
    return m;
}

void write_matrix_db_csv(const MatC& matrix, const std::string& file) {
    ensure_parent_dir(file);
    const double peak = matrix.cwiseAbs().maxCoeff();
    std::ofstream f(file);
    f << "row,col,mag_db\n";
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            const double mag = std::abs(matrix(i, j)) / (peak > 0 ? peak : 1.0);
            f << i << "," << j << "," << format_double(db20(mag + 1e-300)) << "\n";
        }
}

void write_matrix_complex_csv(const MatC& matrix, const std::string& file) {
    ensure_parent_dir(file);
    std::ofstream f(file);
    f << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            f << i << "," << j << "," << format_double(matrix(i, j).real()) << ","
              << format_double(matrix(i, j).imag()) << "\n";
}

void export_channel_matrices(const ExperimentConfig& cfg, std::uint64_t seed,
                             const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const ChannelMatrices m = measure_channel_matrices(cfg, seed);
    write_matrix_db_csv(m.odss_delay_scale, (fs::path(directory) / "odss_delay_scale.csv").string());
    write_matrix_db_csv(m.odss_mellin_fourier,
                        (fs::path(directory) / "odss_mellin_fourier.csv").string());
    write_matrix_db_csv(m.otfs_time_frequency,
                        (fs::path(directory) / "otfs_time_frequency.csv").string());
    write_matrix_complex_csv(m.odss_delay_scale,
                             (fs::path(directory) / "odss_delay_scale_complex.csv").string());

    // the fixed precoder pair alongside the measured channel
    const auto transform = modem::OdssTransform::build(cfg.odss_q, cfg.odss_scales);
    write_matrix_complex_csv(transform.forward, (fs::path(directory) / "odss_t_imf.csv").string());
}

double max_ici_db(const MatC& matrix) {
    double diag_peak = 0.0, off_peak = 0.0;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            const double a = std::abs(matrix(i, j));
            if (i == j) diag_peak = std::max(diag_peak, a);
            else off_peak = std::max(off_peak, a);
        }
    if (diag_peak <= 0.0) return 0.0;
    return db20((off_peak + 1e-300) / diag_peak);
}

std::vector<SpectrumPoint> compute_spectra(const waveforms::SubcarrierBank& bank, int nfft) {
    int size = 1;
    while (size < std::max(nfft, bank.frame_length)) size <<= 1;

    Eigen::FFT<double> fft;
    std::vector<SpectrumPoint> out;
    out.reserve(static_cast<size_t>(bank.size()) * size);

    double peak = 0.0;
    std::vector<std::vector<double>> power(bank.size());
    for (int j = 0; j < bank.size(); ++j) {
        std::vector<Complex> in(static_cast<size_t>(size), Complex(0, 0));
        for (int t = 0; t < bank.frame_length; ++t) in[static_cast<size_t>(t)] = bank.waveforms(t, j);
        std::vector<Complex> spec(static_cast<size_t>(size));
        fft.fwd(spec, in);
        power[j].resize(static_cast<size_t>(size));
        for (int k = 0; k < size; ++k) {
            power[j][static_cast<size_t>(k)] = std::norm(spec[static_cast<size_t>(k)]);
            peak = std::max(peak, power[j][static_cast<size_t>(k)]);
        }
    }
    for (int j = 0; j < bank.size(); ++j)
        for (int k = 0; k < size; ++k)
            out.push_back({j, k * bank.sample_rate_hz / size,
                           db10(power[j][static_cast<size_t>(k)] / peak + 1e-300)});
    return out;
}

void export_spectra(const ExperimentConfig& cfg, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const auto bank = make_odss_bank(cfg);
    const auto points = compute_spectra(bank);
    std::ofstream f(fs::path(directory) / "spectra.csv");
    f << "subcarrier,freq_hz,power_db\n";
    for (const auto& p : points)
        f << p.subcarrier << "," << format_double(p.freq_hz) << "," << format_double(p.power_db)
          << "\n";
    waveforms::write_bank_raw(bank, (fs::path(directory) / "bank").string());
}

std::vector<modem::DesignRow> run_param_study(double bandwidth_hz,
                                              const std::vector<double>& tau_max_list,
                                              double alpha_max, double gamma,
                                              const std::vector<double>& q_grid) {
    (void)gamma;  // pulse-length factor; eta is reported at the minimum symbol duration
    std::vector<modem::DesignRow> rows;
    for (double tau : tau_max_list)
        for (double q : q_grid) {
            if (!(q > 1.0)) throw std::invalid_argument("run_param_study: q grid must exceed 1");
            rows.push_back(modem::design_for_ratio(bandwidth_hz, tau, alpha_max, q));
        }
    return rows;
}

void write_study_csv(const std::vector<modem::DesignRow>& rows, const std::string& file) {
    ensure_parent_dir(file);
    std::ofstream f(file);
    f << "q,tau_max_s,n_scales,w_hz,w_max_hz,m_tot,eta,feasible\n";
    for (const auto& r : rows)
        f << format_double(r.q) << "," << format_double(r.tau_max_s) << "," << r.n_scales << ","
          << format_double(r.w_hz) << "," << format_double(r.w_max_hz) << "," << r.m_tot << ","
          << format_double(r.eta) << "," << (r.feasible ? 1 : 0) << "\n";
}

}  // namespace odss::harness
