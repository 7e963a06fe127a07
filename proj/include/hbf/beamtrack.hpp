#ifndef HBF_BEAMTRACK_HPP
#define HBF_BEAMTRACK_HPP

#include <optional>
#include <utility>

#include "hbf/array_rf.hpp"
#include "hbf/rng.hpp"

namespace hbf {

struct TrackerConfig {
    double alpha0 = 0.3;          // initial step size
    double tau_alpha = 200.0;     // step decay time constant (iterations)
    double delta = 0.05;          // perturbation scale
    double smoothing = 0.7;       // EMA factor on the raw gradient
};

/// One analog-power measurement taken under a probe weight.
struct PowerObservation {
    CVec weight;       // quantized weight actually applied
    double mean_power; // mean baseband power over the observation window
    int subframe_index = 0;
};

struct ProbePair {
    CVec plus;
    CVec minus;
    CVec direction; // unit p, orthogonal to the current weight
};

struct EigenResult {
    CVec vector;
    double value = 0.0;
    bool degenerate = false; // top eigenvalue multiplicity > 1 within 1e-6
};

/// Dominant eigenvector / eigenvalue of a Hermitian PSD matrix by the
/// power method (repeated squaring plus a refinement sweep).
EigenResult eigen_oracle(const CMat& r);

/// 10*log10(lambda_max / (a^H R a / ||a||^2)), capped at 100 dB.
double optimality_gap(const CVec& weight, const CMat& r);
double optimality_gap(const CVec& weight, const CMat& r, double lambda_max);

/// Derivative-free tracker of the average-SNR-optimal beam weight.
/// Each iteration probes a +/- perturbation pair, turns the measured power
/// difference into a directional-derivative estimate, and ascends.
class BeamTracker {
  public:
    BeamTracker(int n, const TrackerConfig& cfg, Rng rng);
    BeamTracker(CVec initial_weight, const TrackerConfig& cfg, Rng rng);

    const CVec& weight() const { return weight_; }
    int iteration() const { return iteration_; }
    double step_size() const;

    /// Step 1: draw a probe direction and the perturbed weight pair.
    ProbePair perturb();

    /// Steps 3-4: gradient estimate from the pair of power observations,
    /// then the normalized ascent update.
    void observe_pair(const PowerObservation& plus, const PowerObservation& minus,
                      const CVec& direction);

    /// Exposed for testing: the raw two-sided directional derivative.
    static double directional_derivative(double power_plus, double power_minus, double delta);

    /// Ascent update with an already-formed unit (or zero) gradient.
    void update_weight(const CVec& gradient);

  private:
    TrackerConfig cfg_;
    Rng rng_;
    CVec weight_;
    CVec grad_ema_;
    int iteration_ = 0;
};

/// Uniform-random unit vector (tracker initialization).
CVec random_unit_weight(int n, Rng& rng);

} // namespace hbf

#endif
