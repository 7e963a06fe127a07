#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hbf/fft.hpp"
#include "hbf/rng.hpp"

using hbf::cplx;

TEST_CASE("rng is reproducible and streams are independent") {
    hbf::Rng a(42), b(42), c(43);
    bool same = true, differ = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        same = same && (va == b.next_u64());
        differ = differ || (va != c.next_u64());
    }
    CHECK(same);
    CHECK(differ);

    hbf::Rng d0 = hbf::Rng::derive(42, 0);
    hbf::Rng d1 = hbf::Rng::derive(42, 1);
    int equal = 0;
    for (int i = 0; i < 1000; ++i)
        if (d0.next_u64() == d1.next_u64()) ++equal;
    CHECK(equal == 0);
}

TEST_CASE("gaussian moments") {
    hbf::Rng rng(7);
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gaussian();
        m1 += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m1 /= n; m2 /= n; m4 /= n;
    CHECK(std::abs(m1) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));

    // CN(0,1): unit total variance, uncorrelated quadratures
    double re2 = 0.0, im2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx z = rng.cgaussian();
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
        cross += z.real() * z.imag();
    }
    CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(im2 / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(cross / n) < 0.01);
}

// O(n^2) reference DFT, unitary scaling
static std::vector<cplx> dft_ref(const std::vector<cplx>& x, bool inverse) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t)
            acc += x[t] * std::polar(1.0, sign * 2.0 * M_PI * double(k * t % n) / double(n));
        out[k] = acc / std::sqrt(double(n));
    }
    return out;
}

TEST_CASE("fft matches the reference DFT and is unitary") {
    hbf::Rng rng(3);
    for (int size : {8, 64, 256}) {
        std::vector<cplx> x(static_cast<std::size_t>(size));
        for (auto& v : x) v = rng.cgaussian();
        auto ref = dft_ref(x, false);
        auto got = x;
        hbf::fft(got, false);
        double err = 0.0, ein = 0.0, eout = 0.0;
        for (int i = 0; i < size; ++i) {
            err = std::max(err, std::abs(got[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]));
            ein += std::norm(x[static_cast<std::size_t>(i)]);
            eout += std::norm(got[static_cast<std::size_t>(i)]);
        }
        CHECK(err < 1e-10);
        CHECK(eout == doctest::Approx(ein).epsilon(1e-12)); // Parseval

        hbf::fft(got, true);
        double round = 0.0;
        for (int i = 0; i < size; ++i)
            round = std::max(round, std::abs(got[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]));
        CHECK(round < 1e-12);
    }
}

TEST_CASE("fft shift equivariance") {
    // circular time shift <-> linear phase ramp
    hbf::Rng rng(5);
    const int n = 128, shift = 17;
    std::vector<cplx> x(n);
    for (auto& v : x) v = rng.cgaussian();
    std::vector<cplx> xs(n);
    for (int t = 0; t < n; ++t) xs[static_cast<std::size_t>(t)] = x[static_cast<std::size_t>((t + shift) % n)];
    auto fx = x, fxs = xs;
    hbf::fft(fx, false);
    hbf::fft(fxs, false);
    double err = 0.0;
    for (int k = 0; k < n; ++k) {
        const cplx ramp = std::polar(1.0, 2.0 * M_PI * k * shift / double(n));
        err = std::max(err, std::abs(fxs[static_cast<std::size_t>(k)] - fx[static_cast<std::size_t>(k)] * ramp));
    }
    CHECK(err < 1e-10);
}

TEST_CASE("cross_correlate matches the direct sum") {
    hbf::Rng rng(11);
    std::vector<cplx> x(300), r(40);
    for (auto& v : x) v = rng.cgaussian();
    for (auto& v : r) v = rng.cgaussian();
    const auto fast = hbf::cross_correlate(x, r);
    REQUIRE(fast.size() == x.size());
    for (std::size_t t = 0; t < x.size(); t += 7) {
        cplx acc(0.0, 0.0);
        for (std::size_t n = 0; n < r.size() && n + t < x.size(); ++n)
            acc += x[n + t] * std::conj(r[n]);
        CHECK(std::abs(fast[t] - acc) < 1e-9);
    }
}

TEST_CASE("fir_filter direct and fft paths agree") {
    hbf::Rng rng(13);
    std::vector<double> taps(65);
    for (auto& t : taps) t = rng.gaussian();
    // small input -> direct path
    std::vector<cplx> xs(500);
    for (auto& v : xs) v = rng.cgaussian();
    // large input -> fft path (same taps)
    std::vector<cplx> xl(40000);
    for (std::size_t i = 0; i < xs.size(); ++i) xl[i] = xs[i];
    const auto ys = hbf::fir_filter(xs, taps);
    const auto yl = hbf::fir_filter(xl, taps);
    double err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) err = std::max(err, std::abs(ys[i] - yl[i]));
    CHECK(err < 1e-9);

    // direct convolution reference at a few offsets
    for (std::size_t t : {0u, 64u, 200u, 499u}) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = 0; k < taps.size(); ++k)
            if (t >= k) acc += taps[k] * xs[t - k];
        CHECK(std::abs(ys[t] - acc) < 1e-9);
    }
}
