#include "odss/modem.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

namespace odss::modem {

double w_max_bound(double alpha_max, double tau_max_s, int n_scales) {
    const double expo = (n_scales == 1) ? 1.0 : (2.0 * n_scales - 3.0);
    return 1.0 / ((1.0 + std::pow(alpha_max, expo)) * tau_max_s);
}

std::vector<int> row_sizes_for(double q, int n_scales) {
    std::vector<int> rows(n_scales);
    for (int n = 0; n < n_scales; ++n) rows[n] = waveforms::shifts_at_scale(q, n);
    return rows;
}

DesignRow design_for_ratio(double bandwidth_hz, double tau_max_s, double alpha_max, double q,
                           int n_cap) {
    if (!(q > 1.0)) throw std::invalid_argument("design_for_ratio: q must exceed 1");
    if (!(bandwidth_hz > 0.0) || !(tau_max_s > 0.0) || !(alpha_max >= 1.0))
        throw std::invalid_argument("design_for_ratio: invalid configuration");

    DesignRow row;
    row.q = q;
    row.tau_max_s = tau_max_s;
    for (int n = 1; n <= n_cap; ++n) {
        const double w = bandwidth_hz * (q - 1.0) / (std::pow(q, n) - 1.0);
        const double w_max = w_max_bound(alpha_max, tau_max_s, n);
        if (w < w_max) {
            row.n_scales = n;
            row.w_hz = w;
            row.w_max_hz = w_max;
            row.m_tot = 0;
            for (int k = 0; k < n; ++k) row.m_tot += waveforms::shifts_at_scale(q, k);
            row.eta = row.m_tot * w / bandwidth_hz;
            row.feasible = true;
            return row;
        }
    }
    row.w_max_hz = w_max_bound(alpha_max, tau_max_s, n_cap);
    return row;
}

OdssParams select_params(double bandwidth_hz, double tau_max_s, double alpha_max, double gamma) {
    if (!(bandwidth_hz > 0.0) || !(tau_max_s > 0.0))
        throw std::invalid_argument("select_params: bandwidth and tau_max must be positive");
    if (!(alpha_max >= 1.0)) throw std::invalid_argument("select_params: alpha_max must be >= 1");
    if (!(gamma > 1.0)) throw std::invalid_argument("select_params: gamma must exceed 1");

    OdssParams p;
    p.bandwidth_hz = bandwidth_hz;
    p.tau_max_s = tau_max_s;
    p.alpha_max = alpha_max;
    p.gamma = gamma;

    if (alpha_max == 1.0) {
        p.q = 1.0;
        p.n_scales = 1;
        p.w_hz = 1.0 / (2.0 * tau_max_s);
        p.w_max_hz = p.w_hz;
        p.m_tot = 1;
        p.row_sizes = {1};
        p.eta = p.m_tot * p.w_hz / bandwidth_hz;
        return p;
    }

    // q = alpha_max^2 sits barely above 1, so the N search can run deep
    // (the 10 kHz / 10 ms / 1.001 design needs N ~ 205)
    p.q = alpha_max * alpha_max;
    const DesignRow row = design_for_ratio(bandwidth_hz, tau_max_s, alpha_max, p.q, 512);
    if (!row.feasible)
        throw std::runtime_error("select_params: no transform length satisfies the bandwidth bound");
    p.n_scales = row.n_scales;
    p.w_hz = row.w_hz;
    p.w_max_hz = row.w_max_hz;
    p.m_tot = row.m_tot;
    p.eta = row.eta;
    p.row_sizes = row_sizes_for(p.q, p.n_scales);
    return p;
}

Frame Frame::zero(const std::vector<int>& rows) {
    Frame f;
    f.row_sizes = rows;
    int total = 0;
    for (int r : rows) total += r;
    f.data = VecC::Zero(total);
    return f;
}

int Frame::row_offset(int k) const {
    int off = 0;
    for (int i = 0; i < k; ++i) off += row_sizes[i];
    return off;
}

OdssTransform OdssTransform::build(double q, int n_scales) {
    OdssTransform t;
    t.row_sizes = row_sizes_for(q, n_scales);
    int m_tot = 0;
    for (int r : t.row_sizes) m_tot += r;

    t.forward = MatC(m_tot, m_tot);
    int row = 0;
    for (int n = 0; n < n_scales; ++n) {
        const double row_amp = std::pow(q, -0.5 * n) / n_scales;
        for (int m = 0; m < t.row_sizes[n]; ++m, ++row) {
            int col = 0;
            for (int k = 0; k < n_scales; ++k) {
                const int mk = t.row_sizes[k];
                for (int l = 0; l < mk; ++l, ++col) {
                    const double phase =
                        kTwoPi * (static_cast<double>(m) * l / mk - static_cast<double>(n) * k / n_scales);
                    t.forward(row, col) = row_amp / mk * unit_phasor(phase);
                }
            }
        }
    }

    Eigen::JacobiSVD<MatC> svd(t.forward);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    t.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(t.condition < 1e12))
        throw std::runtime_error("OdssTransform: transform matrix is numerically singular");

    t.inverse = t.forward.partialPivLu().inverse();
    const double residual =
        (t.forward * t.inverse - MatC::Identity(m_tot, m_tot)).cwiseAbs().maxCoeff();
    if (!(residual < 1e-8))
        throw std::runtime_error("OdssTransform: inverse verification failed");
    return t;
}

DelayScaleFrame odss_transform(const SymbolFrame& x, const OdssTransform& t) {
    if (x.total() != t.size()) throw std::invalid_argument("odss_transform: frame shape mismatch");
    Frame out;
    out.row_sizes = t.row_sizes;
    out.data = t.forward * x.data;
    return out;
}

SymbolFrame inverse_odss_transform(const DelayScaleFrame& z, const OdssTransform& t) {
    if (z.total() != t.size())
        throw std::invalid_argument("inverse_odss_transform: frame shape mismatch");
    Frame out;
    out.row_sizes = t.row_sizes;
    out.data = t.inverse * z.data;
    return out;
}

VecC modulate(const DelayScaleFrame& x, const waveforms::SubcarrierBank& bank) {
    if (x.total() != bank.size()) throw std::invalid_argument("modulate: frame does not match bank");
    return bank.waveforms * x.data;
}

DelayScaleFrame demodulate(const VecC& r, const waveforms::SubcarrierBank& bank) {
    VecC r_frame = VecC::Zero(bank.frame_length);
    const Eigen::Index n = std::min<Eigen::Index>(r.size(), bank.frame_length);
    r_frame.head(n) = r.head(n);

    Frame out;
    out.row_sizes = row_sizes_for(bank.q, bank.n_scales);
    int sum = 0;
    for (int v : out.row_sizes) sum += v;
    if (sum != bank.size()) out.row_sizes = {bank.size()};  // flat shape for non-ODSS banks
    out.data = bank.waveforms.adjoint() * r_frame;
    return out;
}

MatC measure_channel_matrix(const waveforms::SubcarrierBank& bank,
                            const std::function<VecC(const VecC&)>& apply, int workers) {
    const int m = bank.size();
    MatC d_full(m, m);
    parallel_for(m, workers, [&](int j) {
        const VecC r = apply(bank.waveforms.col(j));
        VecC r_frame = VecC::Zero(bank.frame_length);
        const Eigen::Index n = std::min<Eigen::Index>(r.size(), bank.frame_length);
        r_frame.head(n) = r.head(n);
        d_full.col(j) = bank.waveforms.adjoint() * r_frame;
    });
    return d_full;
}

BankAmbiguity::BankAmbiguity(const waveforms::SubcarrierBank& bank, int oversample) : bank_(&bank) {
    fine_.reserve(bank.size());
    const auto& interp = waveforms::default_interpolator();
    for (int j = 0; j < bank.size(); ++j) {
        const auto& p = bank.lattice[j];
        fine_.emplace_back(VecC(bank.waveforms.col(j).segment(p.start, p.length)), oversample, interp);
    }
}

VecC BankAmbiguity::diag_gains(const channel::PathSet& paths, const channel::ResamplerConfig& cfg,
                               double carrier_hz) const {
    const auto& bank = *bank_;
    const double fs = bank.sample_rate_hz;
    VecC gains = VecC::Zero(bank.size());
    for (const channel::Path& path : paths) {
        const channel::RealizedPath rp = channel::realize_path(path, cfg, fs);
        const double alpha = rp.alpha.value();
        const double shift = rp.tau_fine_s * fs;  // fine delay in coarse samples
        const double dopp = (alpha - 1.0) * carrier_hz;
        Complex gain = path.gain * unit_phasor(-kTwoPi * carrier_hz * alpha * rp.tau_fine_s);
        if (cfg.sqrt_alpha_gain) gain *= std::sqrt(path.scale);
        for (int j = 0; j < bank.size(); ++j) {
            const auto& p = bank.lattice[j];
            Complex acc(0.0, 0.0);
            for (int t = p.start; t < p.start + p.length; ++t) {
                // position of the scaled copy s(alpha (t - tau_r)), relative to this segment
                const double pos = alpha * (t - shift) - p.start;
                const Complex v = fine_[j].at(pos);
                acc += std::conj(v) * bank.waveforms(t, j) * unit_phasor(-kTwoPi * dopp * t / fs);
            }
            gains[j] += gain * std::conj(acc);
        }
    }
    return gains;
}

DiagChannel analytic_diag_gains(const channel::PathSet& paths,
                                const waveforms::SubcarrierBank& bank,
                                const channel::ResamplerConfig& cfg, double carrier_hz,
                                double noise_variance) {
    BankAmbiguity amb(bank, cfg.oversample);
    DiagChannel d;
    d.gains = amb.diag_gains(paths, cfg, carrier_hz);
    d.noise_variance = noise_variance;
    return d;
}

VecC mmse_equalize(const VecC& y, const VecC& d, double noise_variance) {
    if (y.size() != d.size()) throw std::invalid_argument("mmse_equalize: size mismatch");
    if (noise_variance < 0.0) throw std::invalid_argument("mmse_equalize: negative noise variance");
    VecC z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double denom = std::norm(d[i]) + noise_variance;
        z[i] = (denom > 0.0) ? std::conj(d[i]) * y[i] / denom : Complex(0.0, 0.0);
    }
    return z;
}

DelayScaleFrame mmse_equalize(const DelayScaleFrame& y, const DiagChannel& d) {
    Frame out;
    out.row_sizes = y.row_sizes;
    out.data = mmse_equalize(y.data, d.gains, d.noise_variance);
    return out;
}

Complex slice(Complex v, const std::vector<Complex>& alphabet) {
    if (alphabet.empty()) throw std::invalid_argument("slice: empty alphabet");
    Complex best = alphabet[0];
    double best_d = std::norm(v - alphabet[0]);
    for (size_t i = 1; i < alphabet.size(); ++i) {
        const double dist = std::norm(v - alphabet[i]);
        if (dist < best_d) {
            best_d = dist;
            best = alphabet[i];
        }
    }
    return best;
}

SymbolFrame decode_frame(const DelayScaleFrame& z, const OdssTransform& t,
                         const std::vector<Complex>& alphabet) {
    if (alphabet.empty()) throw std::invalid_argument("decode_frame: empty alphabet");
    SymbolFrame x = inverse_odss_transform(z, t);
    for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data[i] = slice(x.data[i], alphabet);
    return x;
}

}  // namespace odss::modem
