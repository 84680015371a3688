#include "odss/channel.hpp"

#include "odss/waveforms.hpp"

#include <fstream>
#include <sstream>

namespace odss::channel {

RealizedPath realize_path(const Path& p, const ResamplerConfig& cfg, double fs) {
    if (!(p.scale > 0.0)) throw std::invalid_argument("realize_path: scale must be positive");
    RealizedPath r;
    r.alpha = dsp::approximate_ratio(p.scale, cfg.rational_tol, cfg.max_denominator);
    r.delay_fine = std::llround(p.delay_s * fs * cfg.oversample);
    r.tau_fine_s = static_cast<double>(r.delay_fine) / (fs * cfg.oversample);
    return r;
}

PathSet draw_paths(const ChannelSpec& spec, std::uint64_t seed) {
    if (spec.paths < 1) throw std::invalid_argument("draw_paths: need at least one path");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    PathSet out;
    out.reserve(spec.paths);
    for (int i = 0; i < spec.paths; ++i) {
        Path p;
        p.gain = Complex(gauss(rng), gauss(rng));
        p.delay_s = u01(rng) * spec.tau_max_s;
        if (spec.alpha_max > 1.0) {
            const double lo = 1.0 / spec.alpha_max;
            p.scale = lo + u01(rng) * (spec.alpha_max - lo);
        } else {
            p.scale = 1.0;
        }
        out.push_back(p);
    }
    return out;
}

VecC apply_channel(const VecC& s, const PathSet& paths, const ResamplerConfig& cfg, double fs,
                   double carrier_hz) {
    if (s.size() == 0) return s;
    const int os = cfg.oversample;
    const dsp::SincInterpolator* interp = &waveforms::default_interpolator();
    std::unique_ptr<dsp::SincInterpolator> custom;
    if (cfg.taps != 31) {
        custom = std::make_unique<dsp::SincInterpolator>(cfg.taps);
        interp = custom.get();
    }

    std::vector<RealizedPath> realized;
    realized.reserve(paths.size());
    std::int64_t out_len = s.size();
    const std::int64_t in_fine_last = (s.size() - 1) * os;
    for (const Path& p : paths) {
        RealizedPath r = realize_path(p, cfg, fs);
        // last output index whose fine position alpha*(os*i - d) stays on the input
        const std::int64_t last =
            (in_fine_last * r.alpha.den / r.alpha.num + r.delay_fine) / os;
        out_len = std::max(out_len, last + 2);
        realized.push_back(r);
    }

    const VecC fine = dsp::fft_upsample(s, os, 2 * interp->taps());
    VecC out = VecC::Zero(out_len);
    for (size_t k = 0; k < paths.size(); ++k) {
        const Path& p = paths[k];
        const RealizedPath& r = realized[k];
        Complex gain = p.gain;
        if (cfg.sqrt_alpha_gain) gain *= std::sqrt(p.scale);
        const double dopp = (r.alpha.value() - 1.0) * carrier_hz;
        const Complex carrier0 = unit_phasor(-kTwoPi * carrier_hz * r.alpha.value() * r.tau_fine_s);
        for (std::int64_t i = 0; i < out_len; ++i) {
            // r(t) = s(alpha (t - tau_r)): fine position alpha*(os*i - d), exact rational
            const std::int64_t t_num = r.alpha.num * (os * i - r.delay_fine);
            std::int64_t idx = t_num / r.alpha.den;
            std::int64_t rem = t_num % r.alpha.den;
            if (rem < 0) {
                idx -= 1;
                rem += r.alpha.den;
            }
            if (idx < -interp->half_width() || idx > fine.size() + interp->half_width()) continue;
            const Complex v =
                interp->sample_split(fine, idx, static_cast<double>(rem) / r.alpha.den);
            out[i] += gain * v * carrier0 * unit_phasor(kTwoPi * dopp * i / fs);
        }
    }
    return out;
}

PathSet omega_convolve(const PathSet& h2, const PathSet& h1) {
    PathSet out;
    out.reserve(h2.size() * h1.size());
    for (const Path& b : h2)
        for (const Path& a : h1) {
            Path c;
            c.gain = b.gain * a.gain;
            c.delay_s = b.delay_s + a.delay_s / b.scale;
            c.scale = b.scale * a.scale;
            out.push_back(c);
        }
    return out;
}

double calibrate_noise_variance(double gram_trace, int path_count, double fs,
                                double frame_duration_s, double snr_db) {
    if (!std::isfinite(snr_db)) return 0.0;
    const double power = path_count * gram_trace / (fs * frame_duration_s);
    return power / from_db10(snr_db);
}

VecC awgn(Eigen::Index length, double variance, std::mt19937_64& rng) {
    VecC out(length);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * variance));
    for (Eigen::Index i = 0; i < length; ++i) out[i] = Complex(gauss(rng), gauss(rng));
    return out;
}

void write_paths_csv(const PathSet& paths, const std::string& file) {
    std::ofstream f(file);
    f << "gain_re,gain_im,delay_s,scale\n";
    char line[160];
    for (const Path& p : paths) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", p.gain.real(),
                      p.gain.imag(), p.delay_s, p.scale);
        f << line;
    }
}

PathSet read_paths_csv(const std::string& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("read_paths_csv: cannot open " + file);
    std::string line;
    std::getline(f, line);  // header
    PathSet out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        double v[4] = {0, 0, 0, 1};
        for (int i = 0; i < 4 && std::getline(ss, tok, ','); ++i) v[i] = std::stod(tok);
        out.push_back(Path{Complex(v[0], v[1]), v[2], v[3]});
    }
    return out;
}

}  // namespace odss::channel
