#include "hbf/phy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace hbf {

namespace {
constexpr double kPi = 3.14159265358979323846;

int gcd_int(int a, int b) { return b == 0 ? a : gcd_int(b, a % b); }

// modified Bessel function I0, power series
double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

int gray_encode(int v) { return v ^ (v >> 1); }

// per-axis level count for a square constellation
int axis_levels(Modulation mod) { return 1 << (bits_per_symbol(mod) / 2); }

double qam_norm(Modulation mod) {
    const int l = axis_levels(mod);
    return std::sqrt(2.0 * (l * l - 1) / 3.0);
}

double axis_modulate(const std::uint8_t* bits, int nbits) {
    int gray = 0;
    for (int i = 0; i < nbits; ++i) gray = (gray << 1) | (bits[i] & 1);
    // gray -> binary
    int v = gray;
    for (int shift = 1; shift < nbits; shift <<= 1) v ^= v >> shift;
    return static_cast<double>(2 * v - ((1 << nbits) - 1));
}

void axis_demodulate(double x, int nbits, std::uint8_t* bits_out) {
    const int l = 1 << nbits;
    int v = static_cast<int>(std::lround((x + (l - 1)) / 2.0));
    v = std::clamp(v, 0, l - 1);
    const int gray = gray_encode(v);
    for (int i = 0; i < nbits; ++i) bits_out[i] = static_cast<std::uint8_t>((gray >> (nbits - 1 - i)) & 1);
}
} // namespace

void Numerology::validate() const {
    if ((fft_size & (fft_size - 1)) != 0) throw std::invalid_argument("Numerology: fft_size must be a power of two");
    if (active_subcarriers % 2 != 0 || active_subcarriers >= fft_size)
        throw std::invalid_argument("Numerology: bad active subcarrier count");
}

SubcarrierGrid Numerology::active_grid() const {
    SubcarrierGrid grid;
    grid.offsets_hz.resize(active_subcarriers);
    for (int a = 0; a < active_subcarriers; ++a)
        grid.offsets_hz[a] = tone_index(a) * subcarrier_spacing_hz;
    return grid;
}

CVec zadoff_chu(int root, int length) {
    if (gcd_int(root % length, length) != 1)
        throw std::invalid_argument("zadoff_chu: root must be coprime with the length");
    CVec x(length);
    for (int n = 0; n < length; ++n) {
        const double phase = -kPi * root * n * (n + 1.0) / length;
        x(n) = std::polar(1.0, phase);
    }
    return x;
}

cplx rs_value(int slot_global, int sym_in_slot, int subcarrier) {
    Rng rng = Rng::derive(0x52535251ULL + 131ULL * slot_global + sym_in_slot,
                          static_cast<std::uint64_t>(subcarrier));
    const std::uint64_t r = rng.next_u64();
    const double re = (r & 1) ? 1.0 : -1.0;
    const double im = (r & 2) ? 1.0 : -1.0;
    return cplx(re, im) * 0.70710678118654752440;
}

ResourceGrid reference_grid(const Numerology& num, int subframe_in_frame, int slot0_global) {
    const int nsym = num.symbols_per_subframe();
    ResourceGrid g;
    g.re = CMat::Zero(num.active_subcarriers, nsym);
    g.roles.setConstant(num.active_subcarriers, nsym, static_cast<std::uint8_t>(ReRole::Data));

    for (int slot = 0; slot < 2; ++slot) {
        for (int sym : {0, 3}) {
            const int col = slot * num.symbols_per_slot + sym;
            for (int a = 0; a < num.active_subcarriers; a += 6) {
                g.roles(a, col) = static_cast<std::uint8_t>(ReRole::Rs);
                g.re(a, col) = rs_value(slot0_global + slot, sym, a);
            }
        }
    }

    if (subframe_has_pss(subframe_in_frame)) {
        const int col = num.symbols_per_slot - 1; // sixth symbol of the first slot
        for (int a = 0; a < num.active_subcarriers; ++a)
            g.roles(a, col) = static_cast<std::uint8_t>(ReRole::Null);
        const CVec zc = zadoff_chu(kDefaultZcRoot);
        const int half = num.active_subcarriers / 2;
        for (int n = 0; n < 63; ++n) {
            const int tone = n - 31;
            if (tone == 0) continue; // DC puncture
            const int a = tone < 0 ? tone + half : tone + half - 1;
            g.roles(a, col) = static_cast<std::uint8_t>(ReRole::Pss);
            g.re(a, col) = zc(n);
        }
    }
    return g;
}

int data_capacity_bits(const Numerology& num, Modulation mod, int subframe_in_frame) {
    const ResourceGrid g = reference_grid(num, subframe_in_frame);
    int data_res = 0;
    for (int c = 0; c < g.roles.cols(); ++c)
        for (int r = 0; r < g.roles.rows(); ++r)
            if (g.role(r, c) == ReRole::Data) ++data_res;
    return data_res * bits_per_symbol(mod);
}

cplx qam_modulate(const std::uint8_t* bits, Modulation mod) {
    const int half = bits_per_symbol(mod) / 2;
    const double i = axis_modulate(bits, half);
    const double q = axis_modulate(bits + half, half);
    return cplx(i, q) / qam_norm(mod);
}

void qam_demodulate(cplx x, Modulation mod, std::uint8_t* bits_out) {
    const int half = bits_per_symbol(mod) / 2;
    const double s = qam_norm(mod);
    axis_demodulate(x.real() * s, half, bits_out);
    axis_demodulate(x.imag() * s, half, bits_out + half);
}

cplx qam_nearest(cplx x, Modulation mod) {
    std::uint8_t bits[8];
    qam_demodulate(x, mod, bits);
    return qam_modulate(bits, mod);
}

ResourceGrid make_subframe_grid(const Numerology& num, Modulation mod, int subframe_in_frame,
                                const std::vector<std::uint8_t>& bits, int slot0_global) {
    ResourceGrid g = reference_grid(num, subframe_in_frame, slot0_global);
    const int bps = bits_per_symbol(mod);
    const int capacity = data_capacity_bits(num, mod, subframe_in_frame);
    if (static_cast<int>(bits.size()) != capacity)
        throw FramingError("make_subframe_grid: got " + std::to_string(bits.size()) +
                           " bits, data capacity is " + std::to_string(capacity));
    std::size_t pos = 0;
    for (int c = 0; c < g.re.cols(); ++c)
        for (int r = 0; r < g.re.rows(); ++r)
            if (g.role(r, c) == ReRole::Data) {
                g.re(r, c) = qam_modulate(bits.data() + pos, mod);
                pos += bps;
            }
    return g;
}

std::vector<cplx> ofdm_modulate(const Numerology& num, const ResourceGrid& grid) {
    const int nsym = static_cast<int>(grid.re.cols());
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(nsym) * num.samples_per_symbol());
    std::vector<cplx> x(num.fft_size);
    for (int c = 0; c < nsym; ++c) {
        std::fill(x.begin(), x.end(), cplx(0.0, 0.0));
        for (int a = 0; a < num.active_subcarriers; ++a) x[num.fft_bin(a)] = grid.re(a, c);
        fft(x, true);
        out.insert(out.end(), x.end() - num.cp_samples, x.end()); // CP
        out.insert(out.end(), x.begin(), x.end());
    }
    return out;
}

ResourceGrid ofdm_demodulate(const Numerology& num, const std::vector<cplx>& samples,
                             int subframe_in_frame, int slot0_global) {
    const int nsym = num.symbols_per_subframe();
    const int sps = num.samples_per_symbol();
    if (static_cast<int>(samples.size()) < nsym * sps)
        throw FramingError("ofdm_demodulate: not enough samples for a subframe");
    ResourceGrid g = reference_grid(num, subframe_in_frame, slot0_global);
    std::vector<cplx> x(num.fft_size);
    for (int c = 0; c < nsym; ++c) {
        const cplx* sym = samples.data() + static_cast<std::size_t>(c) * sps + num.cp_samples;
        std::copy(sym, sym + num.fft_size, x.begin());
        fft(x, false);
        for (int a = 0; a < num.active_subcarriers; ++a) g.re(a, c) = x[num.fft_bin(a)];
    }
    return g;
}

std::vector<double> design_lpf(const FilterSpec& spec, double sample_rate_hz) {
    const double delta_s = std::pow(10.0, -spec.stopband_attenuation_db / 20.0);
    const double delta_p = std::pow(10.0, spec.passband_ripple_db / 20.0) - 1.0;
    const double delta = std::min(delta_s, delta_p);
    const double atten = -20.0 * std::log10(delta);

    double beta;
    if (atten > 50.0)
        beta = 0.1102 * (atten - 8.7);
    else if (atten >= 21.0)
        beta = 0.5842 * std::pow(atten - 21.0, 0.4) + 0.07886 * (atten - 21.0);
    else
        beta = 0.0;

    const double dw = 2.0 * kPi * (spec.stopband_edge_hz - spec.cutoff_hz) / sample_rate_hz;
    int ntaps = static_cast<int>(std::ceil((atten - 7.95) / (2.285 * dw))) + 5;
    if (ntaps % 2 == 0) ++ntaps;

    const double fc = 0.5 * (spec.cutoff_hz + spec.stopband_edge_hz) / sample_rate_hz; // normalized

    auto build = [&](int n) {
        std::vector<double> h(n);
        const int m = (n - 1) / 2;
        const double i0b = bessel_i0(beta);
        for (int k = 0; k < n; ++k) {
            const double t = k - m;
            const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * t) / (kPi * t);
            const double r = 2.0 * t / (n - 1);
            h[k] = sinc * bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        }
        const double dc = std::accumulate(h.begin(), h.end(), 0.0);
        for (auto& v : h) v /= dc;
        return h;
    };

    auto check = [&](const std::vector<double>& h, double& worst_ripple, double& worst_atten) {
        worst_ripple = 0.0;
        worst_atten = std::numeric_limits<double>::infinity();
        const int grid_n = 4096;
        for (int i = 0; i < grid_n; ++i) {
            const double f = 0.5 * sample_rate_hz * i / grid_n;
            cplx resp(0.0, 0.0);
            const double w = 2.0 * kPi * f / sample_rate_hz;
            for (std::size_t k = 0; k < h.size(); ++k) resp += h[k] * std::polar(1.0, -w * static_cast<double>(k));
            const double mag_db = 20.0 * std::log10(std::abs(resp) + 1e-300);
            if (f <= spec.cutoff_hz) worst_ripple = std::max(worst_ripple, std::abs(mag_db));
            else if (f >= spec.stopband_edge_hz) worst_atten = std::min(worst_atten, -mag_db);
        }
        return worst_ripple <= spec.passband_ripple_db && worst_atten >= spec.stopband_attenuation_db;
    };

    double ripple = 0.0, attained = 0.0;
    while (ntaps <= spec.max_taps) {
        std::vector<double> h = build(ntaps);
        if (check(h, ripple, attained)) return h;
        ntaps += 8;
        if (ntaps % 2 == 0) ++ntaps;
    }
    throw DesignError("design_lpf: mask not met within " + std::to_string(spec.max_taps) +
                      " taps (ripple " + std::to_string(ripple) + " dB, attenuation " +
                      std::to_string(attained) + " dB)");
}

std::vector<cplx> pss_time_replica(const Numerology& num, int root) {
    std::vector<cplx> x(num.fft_size, cplx(0.0, 0.0));
    const CVec zc = zadoff_chu(root);
    for (int n = 0; n < 63; ++n) {
        const int tone = n - 31;
        if (tone == 0) continue;
        x[(tone + num.fft_size) % num.fft_size] = zc(n);
    }
    fft(x, true);
    return x;
}

SyncResult synchronize(const std::vector<cplx>& samples, const std::vector<cplx>& pss_replica,
                       const std::vector<double>& lpf_taps, double peak_ratio_threshold) {
    std::vector<cplx> replica = pss_replica;
    replica.resize(replica.size() + lpf_taps.size(), cplx(0.0, 0.0)); // room for the filter tail
    const std::vector<cplx> sf = fir_filter(samples, lpf_taps);
    const std::vector<cplx> rf = fir_filter(replica, lpf_taps);
    const std::vector<cplx> corr = cross_correlate(sf, rf);

    long best = 0;
    double best_mag = -1.0;
    const long tmax = static_cast<long>(samples.size());
    for (long t = 0; t < tmax; ++t) {
        const double m = std::norm(corr[static_cast<std::size_t>(t)]);
        if (m > best_mag) {
            best_mag = m;
            best = t;
        }
    }
    // multipath arriving within one cyclic prefix of the peak belongs to the
    // same timing hypothesis, so exclude a CP-wide zone from the sidelobes
    const long guard = static_cast<long>(pss_replica.size()) / 4;
    double side_acc = 0.0;
    long side_count = 0;
    for (long t = 0; t < tmax; ++t) {
        if (std::labs(t - best) <= guard) continue;
        side_acc += std::norm(corr[static_cast<std::size_t>(t)]);
        ++side_count;
    }
    SyncResult res;
    res.offset = best;
    res.peak_ratio = side_count > 0 && side_acc > 0.0
                         ? std::sqrt(best_mag / (side_acc / side_count))
                         : std::numeric_limits<double>::infinity();
    res.ok = res.peak_ratio >= peak_ratio_threshold;
    return res;
}

PssCorrelator::PssCorrelator(const Numerology& num, const std::vector<double>& lpf_taps,
                             int root, int decimation)
    : decimation_(std::max(1, decimation)) {
    // kernel = replica conv taps conv reversed(taps); correlating the raw
    // samples against it equals correlating filtered vs filtered, delayed
    // by taps-1 (compensated in locate()).
    std::vector<cplx> replica = pss_time_replica(num, root);
    replica.resize(replica.size() + 2 * lpf_taps.size(), cplx(0.0, 0.0));
    std::vector<double> rev(lpf_taps.rbegin(), lpf_taps.rend());
    kernel_ = fir_filter(fir_filter(replica, lpf_taps), rev);
    group_delay_ = static_cast<long>(lpf_taps.size()) - 1;
    cp_guard_ = num.cp_samples;
    for (std::size_t j = 0; j * decimation_ < kernel_.size(); ++j)
        kernel_dec_.push_back(kernel_[j * decimation_]);
}

SyncResult PssCorrelator::locate(const std::vector<cplx>& samples,
                                 double peak_ratio_threshold) const {
    // the causal kernel delays the statistic by taps-1 relative to the
    // filtered-vs-filtered correlation; compensated when reporting

    // coarse pass on the decimated stream
    std::vector<cplx> xdec;
    xdec.reserve(samples.size() / decimation_ + 1);
    for (std::size_t n = 0; n < samples.size(); n += decimation_) xdec.push_back(samples[n]);
    const std::vector<cplx> corr = cross_correlate(xdec, kernel_dec_);

    long best_dec = 0;
    double best_mag = -1.0;
    for (long t = 0; t < static_cast<long>(xdec.size()); ++t) {
        const double m = std::norm(corr[static_cast<std::size_t>(t)]);
        if (m > best_mag) {
            best_mag = m;
            best_dec = t;
        }
    }
    // CP-wide exclusion, as in synchronize(): in-CP multipath is the peak
    const long guard = cp_guard_ / decimation_ + 8;
    double side_acc = 0.0;
    long side_count = 0;
    for (long t = 0; t < static_cast<long>(xdec.size()); ++t) {
        if (std::labs(t - best_dec) <= guard) continue;
        side_acc += std::norm(corr[static_cast<std::size_t>(t)]);
        ++side_count;
    }

    // exact full-rate refinement around the coarse peak
    const long window = 3 * decimation_ + 4;
    const long center = best_dec * decimation_;
    long best = 0;
    double best_fine = -1.0;
    for (long t = std::max(0L, center - window);
         t <= std::min(static_cast<long>(samples.size()) - 1, center + window); ++t) {
        cplx acc(0.0, 0.0);
        const std::size_t nmax = std::min(kernel_.size(), samples.size() - static_cast<std::size_t>(t));
        for (std::size_t n = 0; n < nmax; ++n)
            acc += samples[static_cast<std::size_t>(t) + n] * std::conj(kernel_[n]);
        const double m = std::norm(acc);
        if (m > best_fine) {
            best_fine = m;
            best = t;
        }
    }

    SyncResult res;
    res.offset = best + group_delay_;
    res.peak_ratio = side_count > 0 && side_acc > 0.0
                         ? std::sqrt(best_mag / (side_acc / side_count))
                         : std::numeric_limits<double>::infinity();
    res.ok = res.peak_ratio >= peak_ratio_threshold;
    return res;
}

CMat estimate_channel(const Numerology& num, const ResourceGrid& rx, const ResourceGrid& ref) {
    const int nsc = num.active_subcarriers;
    const int nsym = static_cast<int>(rx.re.cols());
    CMat est = CMat::Zero(nsc, nsym);

    std::vector<int> rs_cols;
    for (int c = 0; c < nsym; ++c)
        if (ref.role(0, c) == ReRole::Rs) rs_cols.push_back(c);
    if (rs_cols.empty()) throw std::invalid_argument("estimate_channel: no RS symbols in grid");

    for (int c : rs_cols) {
        // LS at the RS lattice
        std::vector<int> pos;
        std::vector<cplx> ls;
        for (int a = 0; a < nsc; a += 6) {
            pos.push_back(a);
            ls.push_back(rx.re(a, c) / ref.re(a, c));
        }
        // linear interpolation across subcarriers, hold at the edges
        for (int a = 0; a < nsc; ++a) {
            const int i = std::min<int>(a / 6, static_cast<int>(pos.size()) - 1);
            if (a <= pos.front()) est(a, c) = ls.front();
            else if (a >= pos.back()) est(a, c) = ls.back();
            else {
                const double t = static_cast<double>(a - pos[i]) / (pos[i + 1] - pos[i]);
                est(a, c) = (1.0 - t) * ls[i] + t * ls[i + 1];
            }
        }
    }
    // time direction: hold the most recent RS-bearing symbol
    for (int c = 0; c < nsym; ++c) {
        if (ref.role(0, c) == ReRole::Rs) continue;
        int src = rs_cols.front();
        for (int rc : rs_cols)
            if (rc <= c) src = rc;
        est.col(c) = est.col(src);
    }
    return est;
}

EqualizeResult equalize_zf(const Numerology&, const ResourceGrid& rx, const CMat& estimates,
                           Modulation mod) {
    EqualizeResult res;
    res.symbols = CMat::Zero(rx.re.rows(), rx.re.cols());
    const int bps = bits_per_symbol(mod);
    double err_acc = 0.0;
    long count = 0;
    std::uint8_t bits[8];
    for (int c = 0; c < rx.re.cols(); ++c) {
        for (int a = 0; a < rx.re.rows(); ++a) {
            if (rx.role(a, c) != ReRole::Data) continue;
            const cplx h = estimates(a, c);
            cplx xhat(0.0, 0.0);
            if (std::abs(h) < 1e-12) {
                ++res.erased;
            } else {
                xhat = rx.re(a, c) / h;
            }
            res.symbols(a, c) = xhat;
            qam_demodulate(xhat, mod, bits);
            res.bits.insert(res.bits.end(), bits, bits + bps);
            if (std::abs(h) >= 1e-12) {
                err_acc += std::norm(xhat - qam_nearest(xhat, mod));
                ++count;
            }
        }
    }
    res.evm_db = count > 0 ? 10.0 * std::log10(err_acc / count + 1e-300) : 0.0;
    return res;
}

SnrResult measure_snr(const Numerology&, const ResourceGrid& rx, const ResourceGrid& ref) {
    std::vector<int> rs_cols;
    for (int c = 0; c < ref.re.cols(); ++c)
        if (ref.role(0, c) == ReRole::Rs) rs_cols.push_back(c);
    if (rs_cols.size() < 2) throw std::invalid_argument("measure_snr: need >= 2 RS-bearing symbols");

    const int t_count = static_cast<int>(rs_cols.size());
    double sig_acc = 0.0, noise_acc = 0.0;
    int sc_count = 0;
    for (int a = 0; a < ref.re.rows(); a += 6) {
        cplx mean(0.0, 0.0);
        std::vector<cplx> ls(rs_cols.size());
        for (std::size_t i = 0; i < rs_cols.size(); ++i) {
            ls[i] = rx.re(a, rs_cols[i]) / ref.re(a, rs_cols[i]);
            mean += ls[i];
        }
        mean /= static_cast<double>(t_count);
        double var = 0.0;
        for (const auto& v : ls) var += std::norm(v - mean);
        noise_acc += var / (t_count - 1);
        sig_acc += std::norm(mean);
        ++sc_count;
    }
    SnrResult res;
    res.noise_power = noise_acc / sc_count;
    res.signal_power = std::max(0.0, sig_acc / sc_count - res.noise_power / t_count);
    if (res.noise_power <= 0.0) {
        res.saturated = true;
        res.snr_db = std::numeric_limits<double>::infinity();
        return res;
    }
    res.snr_db = 10.0 * std::log10(res.signal_power / res.noise_power + 1e-300);
    return res;
}

void write_iq_file(const std::string& path, const std::vector<cplx>& samples,
                   double sample_rate_hz) {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw std::runtime_error("write_iq_file: cannot open " + path);
    for (const auto& s : samples) {
        const float iq[2] = {static_cast<float>(s.real()), static_cast<float>(s.imag())};
        bin.write(reinterpret_cast<const char*>(iq), sizeof(iq));
    }
    std::ofstream side(path + ".txt");
    side << "format=float32le interleaved I,Q; samples=" << samples.size()
         << "; sample_rate_hz=" << sample_rate_hz << "\n";
}

} // namespace hbf
