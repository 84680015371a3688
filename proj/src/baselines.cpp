#include "odss/baselines.hpp"

namespace odss::baselines {

MatC isfft(const MatC& dd) {
    const int n = static_cast<int>(dd.rows());
    const int m = static_cast<int>(dd.cols());
    MatC tf(n, m);
    for (int nn = 0; nn < n; ++nn)
        for (int mm = 0; mm < m; ++mm) {
            Complex acc(0.0, 0.0);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < m; ++l)
                    acc += dd(k, l) * unit_phasor(kTwoPi * (static_cast<double>(nn) * k / n -
                                                            static_cast<double>(mm) * l / m));
            tf(nn, mm) = acc / static_cast<double>(n * m);
        }
    return tf;
}

MatC sfft(const MatC& tf) {
    const int n = static_cast<int>(tf.rows());
    const int m = static_cast<int>(tf.cols());
    MatC dd(n, m);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < m; ++l) {
            Complex acc(0.0, 0.0);
            for (int nn = 0; nn < n; ++nn)
                for (int mm = 0; mm < m; ++mm)
                    acc += tf(nn, mm) * unit_phasor(-kTwoPi * (static_cast<double>(nn) * k / n -
                                                               static_cast<double>(mm) * l / m));
            dd(k, l) = acc;
        }
    return dd;
}

waveforms::SubcarrierBank build_otfs_bank(const OtfsGrid& grid, double sample_rate_hz,
                                          waveforms::WindowKind window) {
    const double fs = sample_rate_hz;
    const int slot_len = static_cast<int>(std::llround(grid.slot_duration_s * fs));
    if (slot_len < 2) throw std::invalid_argument("build_otfs_bank: slot too short for sample rate");
    const double top = (grid.n_bins - 1) * grid.delta_f_hz + 3.0 / grid.slot_duration_s;
    if (top > fs) throw std::runtime_error("build_otfs_bank: grid exceeds the complex Nyquist band");

    waveforms::SubcarrierBank bank;
    bank.sample_rate_hz = fs;
    bank.frame_length = slot_len * grid.m_slots;
    bank.frame_duration_s = bank.frame_length / fs;
    bank.q = 1.0;
    bank.n_scales = 1;
    bank.window = window;
    bank.waveforms = MatC::Zero(bank.frame_length, grid.total());
    bank.lattice.reserve(grid.total());

    const auto win = waveforms::PhydyasWindow::reference_k3();
    VecD pulse(slot_len);
    for (int t = 0; t < slot_len; ++t)
        pulse[t] = (window == waveforms::WindowKind::kPhydyas)
                       ? win.value(t / fs, grid.slot_duration_s)
                       : 1.0;
    pulse /= pulse.norm();

    int col = 0;
    for (int m = 0; m < grid.m_slots; ++m)
        for (int n = 0; n < grid.n_bins; ++n, ++col) {
            waveforms::LatticePoint p;
            p.n = n;
            p.m = m;
            p.delay_s = m * grid.slot_duration_s;
            p.scale = 1.0;
            p.freq_lo_hz = n * grid.delta_f_hz;
            p.freq_hi_hz = p.freq_lo_hz;
            p.start = m * slot_len;
            p.length = slot_len;
            p.raw_energy = 1.0;
            for (int t = 0; t < slot_len; ++t) {
                const double rel = t / fs;
                bank.waveforms(p.start + t, col) =
                    pulse[t] * unit_phasor(kTwoPi * n * grid.delta_f_hz * rel);
            }
            bank.lattice.push_back(p);
        }
    return bank;
}

VecC otfs_modulate(const MatC& tf, const waveforms::SubcarrierBank& bank) {
    // column order n + N*m matches column-major stacking of the N x M grid
    VecC x = Eigen::Map<const VecC>(tf.data(), tf.size());
    return bank.waveforms * x;
}

MatC otfs_demodulate(const VecC& r, const waveforms::SubcarrierBank& bank, const OtfsGrid& grid) {
    const modem::Frame y = modem::demodulate(r, bank);
    return Eigen::Map<const MatC>(y.data.data(), grid.n_bins, grid.m_slots);
}

waveforms::SubcarrierBank build_ofdm_bank(const OfdmConfig& cfg) {
    const double fs = cfg.sample_rate_hz;
    const int frame = cfg.n_fft;
    const double frame_s = frame / fs;

    waveforms::SubcarrierBank bank;
    bank.sample_rate_hz = fs;
    bank.frame_length = frame;
    bank.frame_duration_s = frame_s;
    bank.q = 1.0;
    bank.n_scales = 1;
    bank.window = cfg.window;
    bank.waveforms = MatC::Zero(frame, cfg.used_bins());
    bank.lattice.reserve(cfg.used_bins());

    const auto win = waveforms::PhydyasWindow::reference_k3();
    VecD pulse(frame);
    for (int t = 0; t < frame; ++t)
        pulse[t] = (cfg.window == waveforms::WindowKind::kPhydyas) ? win.value(t / fs, frame_s) : 1.0;
    pulse /= pulse.norm();

    for (int s = 0; s < cfg.used_bins(); ++s) {
        const double freq = s * cfg.used_spacing_hz();
        waveforms::LatticePoint p;
        p.n = 0;
        p.m = s;
        p.delay_s = 0.0;
        p.scale = 1.0;
        p.freq_lo_hz = freq;
        p.freq_hi_hz = freq;
        p.start = 0;
        p.length = frame;
        p.raw_energy = 1.0;
        for (int t = 0; t < frame; ++t)
            bank.waveforms(t, s) = pulse[t] * unit_phasor(kTwoPi * freq * t / fs);
        bank.lattice.push_back(p);
    }
    return bank;
}

VecC ofdm_modulate(const VecC& symbols, const waveforms::SubcarrierBank& bank) {
    if (symbols.size() != bank.size())
        throw std::invalid_argument("ofdm_modulate: symbol count does not match used bins");
    return bank.waveforms * symbols;
}

VecC ofdm_demodulate(const VecC& r, const waveforms::SubcarrierBank& bank) {
    return modem::demodulate(r, bank).data;
}

VecC ofdm_diag_gains(const OfdmConfig& cfg, const waveforms::SubcarrierBank& bank,
                     const channel::PathSet& paths, const channel::ResamplerConfig& rcfg,
                     double carrier_hz) {
    const double fs = cfg.sample_rate_hz;
    const int frame = cfg.n_fft;
    const double frame_s = frame / fs;
    const auto win = waveforms::PhydyasWindow::reference_k3();

    // the DC bin's window sidebands straddle 0 Hz and wrap under the
    // one-sided band convention of the resampler; evaluate that bin from
    // the sampled waveform so the equalizer matches the emulated channel
    const dsp::FineSignal bin0(VecC(bank.waveforms.col(0)), rcfg.oversample,
                               waveforms::default_interpolator());

    // unit-energy normalization of the shared pulse
    double energy = 0.0;
    VecD pulse(frame);
    for (int t = 0; t < frame; ++t) {
        pulse[t] = (cfg.window == waveforms::WindowKind::kPhydyas) ? win.value(t / fs, frame_s) : 1.0;
        energy += pulse[t] * pulse[t];
    }
    const double c2 = 1.0 / energy;

    VecC gains = VecC::Zero(cfg.used_bins());
    for (const channel::Path& path : paths) {
        const channel::RealizedPath rp = channel::realize_path(path, rcfg, fs);
        const double alpha = rp.alpha.value();
        const double shift = rp.tau_fine_s * fs;

        // w2[t] = g_w(t) g_w(alpha (t - shift)), the scaled window in closed form
        VecD w2(frame);
        for (int t = 0; t < frame; ++t) {
            const double x = alpha * (t - shift) / fs;
            double wv = 0.0;
            if (x >= 0.0 && x < frame_s)
                wv = (cfg.window == waveforms::WindowKind::kPhydyas) ? win.value(x, frame_s) : 1.0;
            w2[t] = pulse[t] * wv;
        }

        Complex g = path.gain;
        if (rcfg.sqrt_alpha_gain) g *= std::sqrt(path.scale);
        for (int s = 1; s < cfg.used_bins(); ++s) {
            const double freq = s * cfg.used_spacing_hz();
            const double dopp = (freq + carrier_hz) * (alpha - 1.0);
            // S(dopp) = sum_t w2[t] e^{-j2pi dopp t / fs} via phasor recurrence
            const Complex step = unit_phasor(-kTwoPi * dopp / fs);
            Complex ph(1.0, 0.0);
            Complex acc(0.0, 0.0);
            for (int t = 0; t < frame; ++t) {
                acc += w2[t] * ph;
                ph *= step;
            }
            gains[s] += g * c2 * std::conj(acc) *
                        unit_phasor(-kTwoPi * (freq + carrier_hz) * alpha * rp.tau_fine_s);
        }

        // bin 0 via band-limited interpolation of the sampled waveform
        {
            const double dopp0 = (alpha - 1.0) * carrier_hz;
            Complex acc(0.0, 0.0);
            for (int t = 0; t < frame; ++t) {
                const Complex v = bin0.at(alpha * (t - shift));
                acc += std::conj(v) * bank.waveforms(t, 0) * unit_phasor(-kTwoPi * dopp0 * t / fs);
            }
            gains[0] += g * unit_phasor(-kTwoPi * carrier_hz * alpha * rp.tau_fine_s) * std::conj(acc);
        }
    }
    return gains;
}

VecC otfs_diag_gains(const OtfsGrid& grid, const waveforms::SubcarrierBank& bank,
                     const channel::PathSet& paths, const channel::ResamplerConfig& rcfg,
                     double carrier_hz) {
    const double fs = bank.sample_rate_hz;
    const int slot_len = bank.frame_length / grid.m_slots;
    const double slot_s = grid.slot_duration_s;
    const auto win = waveforms::PhydyasWindow::reference_k3();
    const bool phydyas = bank.window == waveforms::WindowKind::kPhydyas;

    double energy = 0.0;
    VecD pulse(slot_len);
    for (int t = 0; t < slot_len; ++t) {
        pulse[t] = phydyas ? win.value(t / fs, slot_s) : 1.0;
        energy += pulse[t] * pulse[t];
    }
    const double c2 = 1.0 / energy;

    // the n = 0 row sits at DC where the window sidebands wrap under the
    // one-sided band convention; evaluate those few entries from samples
    std::vector<dsp::FineSignal> dc_cols;
    dc_cols.reserve(grid.m_slots);
    for (int m = 0; m < grid.m_slots; ++m)
        dc_cols.emplace_back(VecC(bank.waveforms.col(grid.n_bins * m).segment(m * slot_len, slot_len)),
                             rcfg.oversample, waveforms::default_interpolator());

    VecC gains = VecC::Zero(bank.size());
    for (const channel::Path& path : paths) {
        const channel::RealizedPath rp = channel::realize_path(path, rcfg, fs);
        const double alpha = rp.alpha.value();
        const double shift = rp.tau_fine_s * fs;
        Complex g = path.gain;
        if (rcfg.sqrt_alpha_gain) g *= std::sqrt(path.scale);
        const Complex carrier0 = unit_phasor(-kTwoPi * carrier_hz * alpha * rp.tau_fine_s);

        for (int m = 0; m < grid.m_slots; ++m) {
            const int start = m * slot_len;
            VecD w2(slot_len);
            for (int t = 0; t < slot_len; ++t) {
                const double x = (alpha * (start + t - shift)) / fs - m * slot_s;
                double wv = 0.0;
                if (x >= 0.0 && x < slot_s) wv = phydyas ? win.value(x, slot_s) : 1.0;
                w2[t] = pulse[t] * wv;
            }
            for (int n = 1; n < grid.n_bins; ++n) {
                const double freq = n * grid.delta_f_hz;
                const double dopp = (freq + carrier_hz) * (alpha - 1.0);
                // S(dopp) over this slot's support, phasor recurrence
                const Complex step = unit_phasor(-kTwoPi * dopp / fs);
                Complex ph = unit_phasor(-kTwoPi * dopp * start / fs);
                Complex acc(0.0, 0.0);
                for (int t = 0; t < slot_len; ++t) {
                    acc += w2[t] * ph;
                    ph *= step;
                }
                gains[n + grid.n_bins * m] +=
                    g * c2 * std::conj(acc) *
                    unit_phasor(-kTwoPi * (freq + carrier_hz) * alpha * rp.tau_fine_s);
            }
            // n = 0 via band-limited interpolation of the sampled waveform
            {
                const double dopp0 = (alpha - 1.0) * carrier_hz;
                Complex acc(0.0, 0.0);
                for (int t = start; t < start + slot_len; ++t) {
                    const Complex v = dc_cols[m].at(alpha * (t - shift) - start);
                    acc += std::conj(v) * bank.waveforms(t, grid.n_bins * m) *
                           unit_phasor(-kTwoPi * dopp0 * t / fs);
                }
                gains[grid.n_bins * m] += g * carrier0 * std::conj(acc);
            }
        }
    }
    return gains;
}

NbPathSet twisted_convolve(const NbPathSet& h2, const NbPathSet& h1) {
    NbPathSet out;
    out.reserve(h2.size() * h1.size());
    for (const NbPath& b : h2)
        for (const NbPath& a : h1) {
            NbPath c;
            c.delay_s = a.delay_s + b.delay_s;
            c.doppler_hz = a.doppler_hz + b.doppler_hz;
            c.gain = a.gain * b.gain * unit_phasor(kTwoPi * b.doppler_hz * a.delay_s);
            out.push_back(c);
        }
    return out;
}

VecC apply_narrowband(const VecC& s, const NbPathSet& paths, double fs) {
    std::int64_t out_len = s.size();
    for (const NbPath& p : paths)
        out_len = std::max<std::int64_t>(out_len, s.size() + std::llround(p.delay_s * fs) + 1);
    VecC out = VecC::Zero(out_len);
    for (const NbPath& p : paths) {
        const std::int64_t d = std::llround(p.delay_s * fs);
        for (std::int64_t t = 0; t < s.size(); ++t) {
            const std::int64_t i = t + d;
            if (i < 0 || i >= out_len) continue;
            out[i] += p.gain * s[t] * unit_phasor(kTwoPi * p.doppler_hz * t / fs);
        }
    }
    return out;
}

}  // namespace odss::baselines
