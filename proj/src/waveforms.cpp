#include "odss/waveforms.hpp"

#include <filesystem>
#include <fstream>

namespace odss::waveforms {

ChirpletSpec ChirpletSpec::create(double q, double duration_s, double sample_rate_hz) {
    if (!(q >= 1.0)) throw std::invalid_argument("ChirpletSpec: q must be >= 1");
    if (!(duration_s > 0.0)) throw std::invalid_argument("ChirpletSpec: duration must be positive");
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("ChirpletSpec: sample rate must be positive");
    ChirpletSpec s;
    s.q = q;
    s.f1 = 1.0 / std::sqrt(q);
    s.f2 = std::sqrt(q);
    s.duration_s = duration_s;
    s.sample_rate_hz = sample_rate_hz;
    if (sample_rate_hz < 2.0 * s.f2)
        throw std::invalid_argument("ChirpletSpec: sample rate below 2*f2");
    return s;
}

VecC chirplet(const ChirpletSpec& spec) {
    const int n = static_cast<int>(std::ceil(spec.duration_s * spec.sample_rate_hz));
    VecC out(n);
    const double kappa = spec.kappa();
    for (int i = 0; i < n; ++i) {
        const double t = i / spec.sample_rate_hz;
        out[i] = unit_phasor(kTwoPi * (spec.f1 * t + 0.5 * kappa * t * t));
    }
    return out;
}

PhydyasWindow PhydyasWindow::reference_k3() {
    PhydyasWindow w;
    w.overlap = 3;
    w.coeffs = VecD(2);
    w.coeffs << 0.91143783, 0.41143783;
    return w;
}

double PhydyasWindow::value(double t, double period) const {
    double acc = 1.0;
    double sign = -1.0;
    for (int k = 1; k < overlap; ++k) {
        acc += 2.0 * sign * coeffs[k - 1] * std::cos(kTwoPi * k * t / period);
        sign = -sign;
    }
    return acc;
}

VecD phydyas_window(const PhydyasWindow& window, const VecD& t_grid, double period) {
    if (window.overlap < 2) throw std::invalid_argument("phydyas_window: overlap factor must be >= 2");
    if (window.coeffs.size() != window.overlap - 1)
        throw std::invalid_argument("phydyas_window: need K-1 coefficients");
    VecD out(t_grid.size());
    for (Eigen::Index i = 0; i < t_grid.size(); ++i) out[i] = window.value(t_grid[i], period);
    return out;
}

OdssBankConfig OdssBankConfig::for_band(double q, int n_scales, double band_hz, double lattice_w_hz,
                                        double pulse_duration_s, double sample_rate_hz,
                                        WindowKind window) {
    OdssBankConfig cfg;
    cfg.q = q;
    cfg.n_scales = n_scales;
    cfg.base_freq_hz = band_hz / std::pow(q, n_scales);
    cfg.lattice_w_hz = lattice_w_hz;
    cfg.pulse_duration_s = pulse_duration_s;
    cfg.sample_rate_hz = sample_rate_hz;
    cfg.window = window;
    return cfg;
}

int shifts_at_scale(double q, int n) {
    return static_cast<int>(std::floor(std::pow(q, n) + 1e-9));
}

namespace {

// prototype value in Hz units: chirp from base_freq to q*base_freq over the
// pulse duration, windowed; zero outside [0, T)
Complex prototype_value(const OdssBankConfig& cfg, const PhydyasWindow& win, double x_s) {
    if (x_s < 0.0 || x_s >= cfg.pulse_duration_s) return {0.0, 0.0};
    const double kappa = cfg.base_freq_hz * (cfg.q - 1.0) / cfg.pulse_duration_s;
    Complex v = unit_phasor(kTwoPi * (cfg.base_freq_hz * x_s + 0.5 * kappa * x_s * x_s));
    if (cfg.window == WindowKind::kPhydyas) v *= win.value(x_s, cfg.pulse_duration_s);
    return v;
}

}  // namespace

Complex eval_subcarrier(const OdssBankConfig& cfg, const LatticePoint& p, double t_s) {
    const PhydyasWindow win = PhydyasWindow::reference_k3();
    const double x = p.scale * (t_s - p.delay_s);
    return std::sqrt(p.scale) * prototype_value(cfg, win, x);
}

SubcarrierBank build_bank(const OdssBankConfig& cfg) {
    if (!(cfg.q >= 1.0)) throw std::invalid_argument("build_bank: q must be >= 1");
    if (cfg.n_scales < 1) throw std::invalid_argument("build_bank: need at least one scale");
    if (!(cfg.lattice_w_hz > 0.0) || !(cfg.pulse_duration_s > 0.0) || !(cfg.sample_rate_hz > 0.0))
        throw std::invalid_argument("build_bank: W, T and Fs must be positive");
    const double top_freq = cfg.base_freq_hz * std::pow(cfg.q, cfg.n_scales);
    if (top_freq > cfg.sample_rate_hz * (1.0 + 1e-12))
        throw std::runtime_error("build_bank: top subcarrier frequency exceeds the complex Nyquist band");

    const PhydyasWindow win = PhydyasWindow::reference_k3();
    const double fs = cfg.sample_rate_hz;

    SubcarrierBank bank;
    bank.sample_rate_hz = fs;
    bank.q = cfg.q;
    bank.n_scales = cfg.n_scales;
    bank.lattice_w_hz = cfg.lattice_w_hz;
    bank.base_freq_hz = cfg.base_freq_hz;
    bank.window = cfg.window;

    // frame covers the last shift plus its pulse support
    double t_end = 0.0;
    int m_tot = 0;
    for (int n = 0; n < cfg.n_scales; ++n) {
        const double scale = std::pow(cfg.q, n);
        const int shifts = shifts_at_scale(cfg.q, n);
        m_tot += shifts;
        const double last = (shifts - 1) / (scale * cfg.lattice_w_hz) + cfg.pulse_duration_s / scale;
        t_end = std::max(t_end, last);
    }
    bank.frame_length = static_cast<int>(std::ceil(t_end * fs - 1e-9));
    bank.frame_duration_s = bank.frame_length / fs;

    bank.waveforms = MatC::Zero(bank.frame_length, m_tot);
    bank.lattice.reserve(m_tot);

    int col = 0;
    for (int n = 0; n < cfg.n_scales; ++n) {
        const double scale = std::pow(cfg.q, n);
        const double amp = std::sqrt(scale);
        const int shifts = shifts_at_scale(cfg.q, n);
        for (int m = 0; m < shifts; ++m, ++col) {
            LatticePoint p;
            p.n = n;
            p.m = m;
            p.scale = scale;
            p.delay_s = m / (scale * cfg.lattice_w_hz);
            p.freq_lo_hz = cfg.base_freq_hz * scale;
            p.freq_hi_hz = cfg.base_freq_hz * cfg.q * scale;
            p.start = std::max(0, static_cast<int>(std::floor(p.delay_s * fs)));
            const int end = std::min(bank.frame_length,
                                     static_cast<int>(std::ceil((p.delay_s + cfg.pulse_duration_s / scale) * fs)) + 1);
            p.length = std::max(0, end - p.start);

            double energy = 0.0;
            for (int t = p.start; t < end; ++t) {
                const double x = scale * (t / fs - p.delay_s);
                const Complex v = amp * prototype_value(cfg, win, x);
                bank.waveforms(t, col) = v;
                energy += std::norm(v);
            }
            p.raw_energy = energy;
            if (energy <= 0.0) throw std::runtime_error("build_bank: empty subcarrier support");
            bank.waveforms.col(col) /= std::sqrt(energy);
            bank.lattice.push_back(p);
        }
    }
    return bank;
}

const dsp::SincInterpolator& default_interpolator() {
    static const dsp::SincInterpolator interp(31, 14.0, 4096);
    return interp;
}

AmbiguityEvaluator::AmbiguityEvaluator(const VecC& g_rx, double sample_rate_hz, const AmbiguityConfig& cfg)
    : fs_(sample_rate_hz), g_len_(static_cast<int>(g_rx.size())) {
    const dsp::SincInterpolator* interp = &default_interpolator();
    if (cfg.taps != 31 || cfg.kaiser_beta != 14.0) {
        custom_interp_ = std::make_shared<dsp::SincInterpolator>(cfg.taps, cfg.kaiser_beta);
        interp = custom_interp_.get();
    }
    fine_ = dsp::FineSignal(g_rx, cfg.oversample, *interp);
    margin_ = interp->half_width() + 1;
}

Complex AmbiguityEvaluator::operator()(const VecC& r, double tau_s, double alpha,
                                       double freq_offset_hz) const {
    if (!(alpha > 0.0)) throw std::invalid_argument("cross_ambiguity: alpha must be positive");
    // restrict to samples where alpha*(t - tau) lands inside the pulse support
    const double lo_pos = -margin_;
    const double hi_pos = g_len_ + margin_;
    double t_lo = tau_s * fs_ + lo_pos / alpha;
    double t_hi = tau_s * fs_ + hi_pos / alpha;
    if (t_lo > t_hi) std::swap(t_lo, t_hi);
    const std::int64_t i_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(t_lo)));
    const std::int64_t i_hi = std::min<std::int64_t>(r.size(), static_cast<std::int64_t>(std::ceil(t_hi)) + 1);

    Complex acc(0.0, 0.0);
    const bool rotate = freq_offset_hz != 0.0;
    for (std::int64_t i = i_lo; i < i_hi; ++i) {
        const double pos = alpha * (i - tau_s * fs_);
        Complex g = fine_.at(pos);
        Complex v = std::conj(g) * r[i];
        if (rotate) v *= unit_phasor(kTwoPi * freq_offset_hz * i / fs_);
        acc += v;
    }
    return std::sqrt(alpha) * acc;
}

Complex cross_ambiguity(const VecC& g_rx, const VecC& r, double tau_s, double alpha,
                        double sample_rate_hz, const AmbiguityConfig& cfg) {
    AmbiguityEvaluator eval(g_rx, sample_rate_hz, cfg);
    return eval(r, tau_s, alpha);
}

MatC correlation_matrix(const SubcarrierBank& bank) {
    if (bank.size() == 0) throw std::invalid_argument("correlation_matrix: empty bank");
    return bank.waveforms.adjoint() * bank.waveforms;
}

double max_offdiag_db(const MatC& gram) {
    double peak = 0.0, off = 0.0;
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
        for (Eigen::Index j = 0; j < gram.cols(); ++j) {
            const double a = std::abs(gram(i, j));
            peak = std::max(peak, a);
            if (i != j) off = std::max(off, a);
        }
    if (off == 0.0) return -400.0;
    return db20(off / peak);
}

void write_bank_raw(const SubcarrierBank& bank, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    std::ofstream header(fs::path(directory) / "bank_header.txt");
    header << "sample_rate_hz " << bank.sample_rate_hz << "\n";
    header << "frame_duration_s " << bank.frame_duration_s << "\n";
    header << "subcarriers " << bank.size() << "\n";
    header << "# file n m delay_s scale\n";
    for (int j = 0; j < bank.size(); ++j) {
        char name[64];
        std::snprintf(name, sizeof(name), "subcarrier_%03d.cf32", j);
        const LatticePoint& p = bank.lattice[j];
        header << name << " " << p.n << " " << p.m << " " << p.delay_s << " " << p.scale << "\n";
        std::ofstream raw(fs::path(directory) / name, std::ios::binary);
        for (int t = 0; t < bank.frame_length; ++t) {
            const float re = static_cast<float>(bank.waveforms(t, j).real());
            const float im = static_cast<float>(bank.waveforms(t, j).imag());
            raw.write(reinterpret_cast<const char*>(&re), sizeof(float));
            raw.write(reinterpret_cast<const char*>(&im), sizeof(float));
        }
    }
}

}  // namespace odss::waveforms
