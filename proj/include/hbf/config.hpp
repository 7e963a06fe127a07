#ifndef HBF_CONFIG_HPP
#define HBF_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "hbf/linksim.hpp"
#include "hbf/syssim.hpp"

namespace hbf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LinkMode { Static, Ab, Trajectory };

/// Everything one experiment needs, parsed from a line-oriented
/// `key = value` file with [sections]. Unknown keys and sections are
/// rejected with a line-anchored diagnostic; the master seed is required.
struct ScenarioConfig {
    // general
    std::uint64_t seed = 0;
    LinkMode mode = LinkMode::Static;
    int subframes = 1000;
    int drops = 1000;
    int ms_per_floor = 50;
    int workers = 0; // 0 = hardware concurrency
    int ensemble_seeds = 1;

    LinkScenario link;
    LatencyModel latency;
    bool latency_ideal = false;

    // channel generation when no explicit clusters are listed
    int cluster_count = 6;
    double mean_azimuth_deg = 20.0;
    double mean_elevation_deg = 0.0;
    double angle_spread_deg = 20.0;
    double delay_spread_ns = 200.0;
    double doppler_rate = 0.02;
    bool explicit_clusters = false;

    // trajectory endpoint (start = the static cluster set, rotated)
    bool trajectory_enabled = false;
    double trajectory_delta_azimuth_deg = 30.0;
    double trajectory_duration_subframes = 2000;

    Deployment deployment;
    PropagationModel propagation;

    bool iq_dump = false;

    static ScenarioConfig parse_file(const std::string& path);
    static ScenarioConfig parse_string(const std::string& text, const std::string& origin = "<string>");

    /// Canonical round-trippable form: parse(serialize(c)) == c.
    std::string serialize() const;

    /// FNV-1a of the canonical serialization (reproducibility stamp).
    std::uint64_t hash() const;

    /// Cluster set for one trial; draws the rich-scattering default when no
    /// explicit clusters are configured.
    std::vector<PathCluster> clusters_for_seed(std::uint64_t trial_seed) const;

    /// LinkScenario with clusters and trajectory resolved for a trial seed.
    LinkScenario resolved_link(std::uint64_t trial_seed) const;

    LatencyModel resolved_latency() const { return latency_ideal ? ideal_latency() : latency; }
};

} // namespace hbf

#endif
