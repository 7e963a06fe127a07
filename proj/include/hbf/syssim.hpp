#ifndef HBF_SYSSIM_HPP
#define HBF_SYSSIM_HPP

#include <array>
#include <string>
#include <vector>

#include "hbf/beamtrack.hpp"
#include "hbf/channel.hpp"

namespace hbf {

struct BaseStation {
    double x_m = 0.0;
    double y_m = 0.0;
    int floor = 0; // mounted at the ceiling of this floor
};

struct FloorGeometry {
    double x_m = 50.0;
    double y_m = 30.0;
    double floor_height_m = 3.5;
    int floors = 2;
    double ms_height_m = 1.5;
};

struct Deployment {
    std::vector<BaseStation> bs;
    FloorGeometry floor{};
    double tx_power_dbm = 23.0;
    int rf_chains = 2;               // both systems
    ArrayGeometry subarray{6, 2, 0.6};
    RfHardwareModel hardware{};
    ElementPattern element{}; // per-element pattern, shared by both systems
    bool quantize = true;
    void validate() const;
};

/// Parametric indoor propagation (stand-in for ray tracing).
struct PropagationModel {
    double pathloss_exponent = 3.0;
    double ref_loss_db = 38.0;       // at 1 m
    double floor_penetration_db = 18.0;
    double shadowing_sigma_db = 4.0;
    double noise_figure_db = 9.0;
    double bandwidth_hz = 20e6;
    double max_rate_bps = 200e6;
    int clusters_per_link = 6;
    double angle_spread_rad = 0.35;

    double pathloss_db(double distance_m, int floors_crossed) const;
    double noise_power_dbm() const;
};

struct MsPosition {
    double x_m = 0.0;
    double y_m = 0.0;
    int floor = 0;
    double z_m = 0.0;
};

enum class SystemVariant : int {
    ConventionalIci = 0,
    ConventionalNoIci = 1,
    HybridIci = 2,
    HybridNoIci = 3,
};
constexpr int kVariantCount = 4;
std::string variant_name(SystemVariant v);

struct RateSample {
    int ms_id = 0;
    int serving_cell = 0;
    double rate_bps = 0.0;
};

struct SystemResult {
    std::array<std::vector<double>, kVariantCount> rates; // per-variant samples
    std::array<double, kVariantCount> mean_rate_bps{};
    long regularized_count = 0; // interference covariances rescued by the noise floor
};

/// Empirical CDF over sorted samples: (rate, cumulative fraction) pairs.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples);

std::vector<MsPosition> drop_users(const Deployment& deployment, int count, Rng& rng);

/// Strongest long-term received power (pathloss + shadowing), beamforming
/// excluded; ties to the lowest BS id. shadowing_db is indexed [bs].
int associate(const MsPosition& ms, const Deployment& deployment, const PropagationModel& prop,
              const std::vector<double>& shadowing_db);

/// Effective 2x2 downlink channel (rx chain x tx chain), small-scale only
/// (large-scale gain applied by the caller). `fading` holds the per
/// (cluster, tx chain, rx chain) coefficients so both system variants see
/// identical randomness.
struct LinkFading {
    std::vector<PathCluster> clusters;
    CMat coeffs; // clusters x (tx*rx) CN(0,1) entries
};
LinkFading draw_link_fading(const PropagationModel& prop, const Deployment& deployment, Rng& rng);

CMat beamform_downlink(const LinkFading& link, const Deployment& deployment, bool hybrid,
                       const CVec& subarray_weight);

/// Saturated analog weight for a link: dominant eigenvector of the link
/// correlation matrix, optionally quantized.
CVec saturated_weight(const LinkFading& link, const Deployment& deployment);

/// min(cap, BW * log2 det(I + (P/2) H^H Q^{-1} H)); Q regularized with the
/// noise floor when singular.
double compute_rate(const CMat& h, const CMat& interference_cov, double noise_power_w,
                    double tx_power_w, double bandwidth_hz, double max_rate_bps,
                    bool* regularized = nullptr);

SystemResult run_system_eval(const Deployment& deployment, const PropagationModel& prop,
                             int drops, int ms_per_floor, std::uint64_t seed, int workers = 1);

/// Paper-style default: five BSs on each of two floors.
Deployment default_deployment();

} // namespace hbf

#endif
