#include "hbf/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace hbf {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}
} // namespace

void fft(std::vector<cplx>& x, bool inverse) {
    const std::size_t n = x.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = x[i + k];
                const cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) v *= scale;
}

std::vector<cplx> cross_correlate(const std::vector<cplx>& x, const std::vector<cplx>& r) {
    const std::size_t n = next_pow2(x.size() + r.size());
    std::vector<cplx> xf(n, cplx(0.0, 0.0));
    std::vector<cplx> rf(n, cplx(0.0, 0.0));
    std::copy(x.begin(), x.end(), xf.begin());
    std::copy(r.begin(), r.end(), rf.begin());
    fft(xf, false);
    fft(rf, false);
    for (std::size_t k = 0; k < n; ++k) xf[k] *= std::conj(rf[k]);
    fft(xf, true);
    // unitary transforms leave a residual 1/sqrt(n); undo it
    const double scale = std::sqrt(static_cast<double>(n));
    std::vector<cplx> out(x.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = xf[t] * scale;
    return out;
}

std::vector<cplx> fir_filter(const std::vector<cplx>& x, const std::vector<double>& taps) {
    // direct form for short inputs, FFT convolution otherwise
    if (x.size() * taps.size() < 1u << 21) {
        std::vector<cplx> y(x.size(), cplx(0.0, 0.0));
        for (std::size_t n = 0; n < x.size(); ++n) {
            cplx acc(0.0, 0.0);
            const std::size_t kmax = std::min(taps.size() - 1, n);
            for (std::size_t k = 0; k <= kmax; ++k) acc += taps[k] * x[n - k];
            y[n] = acc;
        }
        return y;
    }
    const std::size_t n = next_pow2(x.size() + taps.size());
    std::vector<cplx> xf(n, cplx(0.0, 0.0));
    std::vector<cplx> hf(n, cplx(0.0, 0.0));
    std::copy(x.begin(), x.end(), xf.begin());
    for (std::size_t k = 0; k < taps.size(); ++k) hf[k] = taps[k];
    fft(xf, false);
    fft(hf, false);
    for (std::size_t k = 0; k < n; ++k) xf[k] *= hf[k];
    fft(xf, true);
    const double scale = std::sqrt(static_cast<double>(n));
    std::vector<cplx> y(x.size());
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = xf[t] * scale;
    return y;
}

} // namespace hbf
