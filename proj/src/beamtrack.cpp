#include "hbf/beamtrack.hpp"

#include <cmath>
#include <stdexcept>

namespace hbf {

namespace {
// residual-based convergence check
double residual(const CMat& r, const CVec& v, double lambda) {
    return (r * v - lambda * v).norm();
}
} // namespace

EigenResult eigen_oracle(const CMat& r) {
    const Eigen::Index n = r.rows();
    if (n != r.cols()) throw std::invalid_argument("eigen_oracle: matrix must be square");
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + r.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("eigen_oracle: matrix must be Hermitian");

    EigenResult res;
    const double scale = r.cwiseAbs().maxCoeff();
    if (scale <= 0.0) {
        res.vector = CVec::Unit(n, 0);
        res.value = 0.0;
        res.degenerate = n > 1;
        return res;
    }

    // log-power method: repeated squaring drives the eigenvalue ratio to
    // machine precision in ~60 matrix products regardless of the gap
    CMat b = r / scale;
    for (int s = 0; s < 60; ++s) {
        b = b * b;
        const double m = b.cwiseAbs().maxCoeff();
        if (!(m > 0.0)) break;
        b /= m;
    }
    Eigen::Index max_col = 0;
    b.colwise().norm().maxCoeff(&max_col);
    CVec v = b.col(max_col);
    v.normalize();

    // plain power-iteration refinement on the original matrix
    double lambda = std::real(v.dot(r * v));
    for (int it = 0; it < 200; ++it) {
        CVec w = r * v;
        const double nrm = w.norm();
        if (nrm <= 0.0) break;
        v = w / nrm;
        lambda = std::real(v.dot(r * v));
        if (residual(r, v, lambda) < 1e-10 * std::max(lambda, 1e-300)) break;
    }
    res.vector = v;
    res.value = lambda;

    // multiplicity probe: one deflated squaring pass estimates lambda_2
    if (n > 1) {
        CMat defl = r - lambda * (v * v.adjoint());
        CVec u = CVec::Ones(n).normalized();
        u -= v * v.dot(u);
        if (u.norm() < 1e-8) u = CVec::Unit(n, n - 1) - v * v.dot(CVec::Unit(n, n - 1));
        u.normalize();
        for (int it = 0; it < 200; ++it) {
            u = defl * u;
            u -= v * v.dot(u);
            const double nrm = u.norm();
            if (nrm <= 0.0) { u.setZero(); break; }
            u /= nrm;
        }
        const double lambda2 = u.norm() > 0.0 ? std::real(u.dot(r * u)) : 0.0;
        res.degenerate = lambda2 > lambda * (1.0 - 1e-6);
    }
    return res;
}

double optimality_gap(const CVec& weight, const CMat& r, double lambda_max) {
    const double nrm2 = weight.squaredNorm();
    const double achieved = nrm2 > 0.0 ? std::real(weight.dot(r * weight)) / nrm2 : 0.0;
    if (achieved <= lambda_max * 1e-10) return 100.0;
    return std::min(100.0, 10.0 * std::log10(lambda_max / achieved));
}

double optimality_gap(const CVec& weight, const CMat& r) {
    return optimality_gap(weight, r, eigen_oracle(r).value);
}

BeamTracker::BeamTracker(int n, const TrackerConfig& cfg, Rng rng)
    : BeamTracker(CVec(), cfg, rng) {
    weight_ = random_unit_weight(n, rng_);
    grad_ema_ = CVec::Zero(n);
}

BeamTracker::BeamTracker(CVec initial_weight, const TrackerConfig& cfg, Rng rng)
    : cfg_(cfg), rng_(rng), weight_(std::move(initial_weight)) {
    if (!(cfg_.delta > 0.0 && cfg_.delta < 1.0))
        throw std::invalid_argument("BeamTracker: delta must lie in (0, 1)");
    if (!(cfg_.alpha0 > 0.0)) throw std::invalid_argument("BeamTracker: alpha0 must be positive");
    if (weight_.size() > 0) {
        weight_.normalize();
        grad_ema_ = CVec::Zero(weight_.size());
    }
}

double BeamTracker::step_size() const {
    return cfg_.alpha0 / (1.0 + iteration_ / cfg_.tau_alpha);
}

ProbePair BeamTracker::perturb() {
    const Eigen::Index n = weight_.size();
    if (n < 2)
        throw std::logic_error(
            "BeamTracker: at least two elements are needed for a tangent probe");
    CVec p(n);
    while (true) {
        for (Eigen::Index k = 0; k < n; ++k) p(k) = rng_.cgaussian();
        p -= weight_ * weight_.dot(p); // tangent to the current weight
        const double nrm = p.norm();
        if (nrm > 1e-12) {
            p /= nrm;
            break;
        }
    }
    ProbePair pair;
    pair.direction = p;
    pair.plus = (weight_ + cfg_.delta * p).normalized();
    pair.minus = (weight_ - cfg_.delta * p).normalized();
    return pair;
}

double BeamTracker::directional_derivative(double power_plus, double power_minus, double delta) {
    return (power_plus - power_minus) / (2.0 * delta);
}

void BeamTracker::observe_pair(const PowerObservation& plus, const PowerObservation& minus,
                               const CVec& direction) {
    const double d = directional_derivative(plus.mean_power, minus.mean_power, cfg_.delta);
    const CVec raw = d * direction;
    grad_ema_ = cfg_.smoothing * grad_ema_ + (1.0 - cfg_.smoothing) * raw;
    const double nrm = grad_ema_.norm();
    // normalizing the smoothed gradient makes the trajectory invariant to
    // any positive scaling of the measured powers
    if (nrm > 1e-300) update_weight(grad_ema_ / nrm);
    else update_weight(CVec::Zero(weight_.size()));
}

void BeamTracker::update_weight(const CVec& gradient) {
    const double gnorm = gradient.norm();
    if (gnorm > 1e-12) {
        if (std::abs(gnorm - 1.0) > 1e-9)
            throw std::invalid_argument("update_weight: gradient must be unit or zero");
        weight_ = (weight_ + step_size() * gradient).normalized();
    }
    ++iteration_;
}

CVec random_unit_weight(int n, Rng& rng) {
    CVec w(n);
    while (true) {
        for (int k = 0; k < n; ++k) w(k) = rng.cgaussian();
        const double nrm = w.norm();
        if (nrm > 1e-12) return w / nrm;
    }
}

} // namespace hbf
