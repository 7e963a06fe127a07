#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "hbf/beamtrack.hpp"
#include "hbf/channel.hpp"

using hbf::CMat;
using hbf::CVec;

namespace {
CMat random_psd(int n, hbf::Rng& rng, int rank = 0) {
    const int r = rank > 0 ? rank : n;
    CMat a(n, r);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < r; ++j) a(i, j) = rng.cgaussian();
    return a * a.adjoint();
}
} // namespace

TEST_CASE("eigen oracle matches a dense solver on random psd matrices") {
    hbf::Rng rng(100);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 11);
        const CMat r = random_psd(n, rng, trial % 3 == 0 ? std::max(1, n / 2) : 0);
        const auto mine = hbf::eigen_oracle(r);
        Eigen::SelfAdjointEigenSolver<CMat> dense(r);
        const double lam = dense.eigenvalues().maxCoeff();
        CHECK(mine.value == doctest::Approx(lam).epsilon(1e-10));
        // vector check up to phase: residual and Rayleigh quotient
        CHECK((r * mine.vector - mine.value * mine.vector).norm() < 1e-8 * lam);
        CHECK(mine.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(mine.degenerate);
    }
    CHECK_THROWS_AS(hbf::eigen_oracle(CMat::Random(3, 4)), std::invalid_argument);
    hbf::Rng rng2(5);
    CMat nh = random_psd(4, rng2);
    nh(0, 1) += std::complex<double>(0.1, 0.0);
    CHECK_THROWS_AS(hbf::eigen_oracle(nh), std::invalid_argument);
}

TEST_CASE("eigen oracle flags degenerate tops") {
    CMat eye = CMat::Identity(4, 4);
    CHECK(hbf::eigen_oracle(eye).degenerate);
    CMat d = CMat::Zero(3, 3);
    d(0, 0) = 2.0; d(1, 1) = 2.0; d(2, 2) = 1.0;
    CHECK(hbf::eigen_oracle(d).degenerate);
    d(1, 1) = 1.5;
    CHECK_FALSE(hbf::eigen_oracle(d).degenerate);
    CHECK(hbf::eigen_oracle(CMat::Zero(2, 2)).degenerate);
}

TEST_CASE("optimality gap: zero at the eigenvector, positive elsewhere, capped") {
    hbf::Rng rng(200);
    const CMat r = random_psd(6, rng);
    const auto top = hbf::eigen_oracle(r);
    CHECK(hbf::optimality_gap(top.vector, r) == doctest::Approx(0.0).epsilon(1e-9));
    for (int t = 0; t < 100; ++t) {
        const CVec w = hbf::random_unit_weight(6, rng);
        const double gap = hbf::optimality_gap(w, r);
        CHECK(gap >= -1e-9);
        CHECK(gap <= 100.0);
        // scale invariance
        CHECK(hbf::optimality_gap(3.7 * w, r) == doctest::Approx(gap).epsilon(1e-12));
    }
    // weight orthogonal to the range of a rank-1 matrix hits the cap
    CMat r1 = CMat::Zero(2, 2);
    r1(0, 0) = 1.0;
    CVec w(2);
    w << 0.0, 1.0;
    CHECK(hbf::optimality_gap(w, r1) == doctest::Approx(100.0));
}

TEST_CASE("probe pairs are tangent, unit-norm, and delta-scaled") {
    hbf::Rng rng(300);
    hbf::TrackerConfig cfg;
    hbf::BeamTracker tracker(6, cfg, hbf::Rng(17));
    for (int t = 0; t < 50; ++t) {
        const CVec w = tracker.weight();
        CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-12));
        const auto pair = tracker.perturb();
        CHECK(pair.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(w.dot(pair.direction)) < 1e-10);
        CHECK(pair.plus.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pair.minus.norm() == doctest::Approx(1.0).epsilon(1e-12));
        // plus/minus are w +/- delta p up to the common normalization
        const double scale = 1.0 / std::sqrt(1.0 + cfg.delta * cfg.delta);
        CHECK((pair.plus - scale * (w + cfg.delta * pair.direction)).norm() < 1e-12);
        CHECK((pair.minus - scale * (w - cfg.delta * pair.direction)).norm() < 1e-12);
        tracker.update_weight(pair.direction);
    }
}

TEST_CASE("directional derivative matches the analytic quadratic-form gradient") {
    // f(w) = w^H R w on the unit sphere; the two-sided difference through
    // the normalized probes approximates the tangent derivative
    // 2 Re(p^H R w) / (1 + delta^2) to second order in delta
    hbf::Rng rng(400);
    const CMat r = random_psd(6, rng);
    hbf::TrackerConfig cfg;
    cfg.delta = 1e-4; // small delta isolates the first-order term
    hbf::BeamTracker tracker(6, cfg, hbf::Rng(23));
    for (int t = 0; t < 20; ++t) {
        hbf::BeamTracker tr(hbf::random_unit_weight(6, rng), cfg, hbf::Rng(t));
        const CVec w = tr.weight();
        const auto pair = tr.perturb();
        const double fp = std::real(pair.plus.dot(r * pair.plus));
        const double fm = std::real(pair.minus.dot(r * pair.minus));
        const double got = hbf::BeamTracker::directional_derivative(fp, fm, cfg.delta);
        const double analytic = 2.0 * std::real(pair.direction.dot(r * w));
        CHECK(got == doctest::Approx(analytic).epsilon(1e-4));
    }
}

TEST_CASE("step size decays on the configured schedule") {
    hbf::TrackerConfig cfg;
    cfg.alpha0 = 0.3;
    cfg.tau_alpha = 200.0;
    hbf::BeamTracker tracker(6, cfg, hbf::Rng(1));
    CHECK(tracker.step_size() == doctest::Approx(0.3));
    for (int i = 0; i < 200; ++i) tracker.update_weight(CVec::Zero(6));
    CHECK(tracker.step_size() == doctest::Approx(0.15));
    for (int i = 0; i < 400; ++i) tracker.update_weight(CVec::Zero(6));
    CHECK(tracker.step_size() == doctest::Approx(0.075));
}

TEST_CASE("update rejects non-unit gradients and keeps the weight unit-norm") {
    hbf::BeamTracker tracker(6, hbf::TrackerConfig{}, hbf::Rng(2));
    CHECK_THROWS_AS(tracker.update_weight(CVec::Ones(6)), std::invalid_argument);
    tracker.update_weight(CVec::Zero(6)); // no-op step still advances the schedule
    CHECK(tracker.iteration() == 1);
    CHECK(tracker.weight().norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("noise-free tracking converges to the dominant eigenvector") {
    // exact powers (no measurement noise): the tracker should close most of
    // the optimality gap within a few hundred iterations
    hbf::Rng rng(500);
    int converged = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        const CMat r = random_psd(6, rng);
        const auto top = hbf::eigen_oracle(r);
        hbf::BeamTracker tracker(6, hbf::TrackerConfig{}, hbf::Rng(900 + trial));
        for (int it = 0; it < 600; ++it) {
            const auto pair = tracker.perturb();
            hbf::PowerObservation plus{pair.plus, std::real(pair.plus.dot(r * pair.plus)), it};
            hbf::PowerObservation minus{pair.minus, std::real(pair.minus.dot(r * pair.minus)), it};
            tracker.observe_pair(plus, minus, pair.direction);
        }
        if (hbf::optimality_gap(tracker.weight(), r, top.value) < 1.0) ++converged;
    }
    CHECK(converged >= 18);
}

TEST_CASE("tracking is invariant to positive scaling of the powers") {
    const CMat r = [] {
        hbf::Rng rng(600);
        return random_psd(6, rng);
    }();
    auto run = [&](double scale) {
        hbf::BeamTracker tracker(6, hbf::TrackerConfig{}, hbf::Rng(31));
        for (int it = 0; it < 100; ++it) {
            const auto pair = tracker.perturb();
            hbf::PowerObservation plus{pair.plus, scale * std::real(pair.plus.dot(r * pair.plus)), it};
            hbf::PowerObservation minus{pair.minus, scale * std::real(pair.minus.dot(r * pair.minus)), it};
            tracker.observe_pair(plus, minus, pair.direction);
        }
        return tracker.weight();
    };
    const CVec w1 = run(1.0);
    const CVec w2 = run(1234.5);
    CHECK((w1 - w2).cwiseAbs().maxCoeff() < 1e-9);
}
