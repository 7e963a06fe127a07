#ifndef HBF_LINKSIM_HPP
#define HBF_LINKSIM_HPP

#include <optional>
#include <string>
#include <vector>

#include "hbf/beamtrack.hpp"
#include "hbf/channel.hpp"
#include "hbf/phy.hpp"

namespace hbf {

/// Control-plane delay budget and beam update cadence of the radio unit.
struct LatencyModel {
    double tcpip_ms = 2.0;
    double control_program_ms = 4.0;
    double ru_apply_ms = 1.0;
    int update_period_half_frames = 3; // 15 ms
    int abandoned_half_frames = 2;     // dropped from decode statistics

    double total_ms() const { return tcpip_ms + control_program_ms + ru_apply_ms; }
    void validate() const;
};

/// Zero-delay, every-subframe updates (used by convergence studies).
LatencyModel ideal_latency();

struct LinkScenario {
    ArrayGeometry geometry{6, 1, 0.6};
    RfHardwareModel hardware{};
    Numerology numerology{};
    TrackerConfig tracker{};
    FadingSpec fading{};
    ElementPattern element{};          // array elements and the baseline antenna
    double baseline_boresight_az = 0.0;
    double baseline_boresight_el = 0.0;
    std::vector<PathCluster> clusters; // static cluster set
    std::optional<TrajectorySpec> trajectory;
    Modulation modulation = Modulation::Qam16;
    double tx_power = 1.0;            // per-RE transmit power (linear)
    double noise_power = 0.01;        // per-element noise power (linear)
    bool quantize = true;
    int sync_plant_offset = 1000;     // planted timing offset, samples
    double tracking_threshold_db = 3.0;
    std::string id = "link";
};

struct TrialRow {
    int subframe = 0;
    int weight_id = 0;
    double snr_db = 0.0;
    double oracle_db = 0.0;
    double gap_db = 0.0;
    double evm_db = 0.0; // NaN on abandoned / invalid subframes
    bool valid = true;
};

/// Weight application event, for the causality/cadence audit.
struct WeightEvent {
    int weight_id = 0;
    double applied_at_ms = 0.0;
    double computed_at_ms = 0.0;
    double latest_observation_ms = 0.0; // newest measurement the weight used
};

struct TrialRecord {
    std::vector<TrialRow> rows;
    std::vector<WeightEvent> weight_events;
    std::string scenario_id;
    std::uint64_t seed = 0;
    bool sync_ok = true;
    long sync_offset = 0;
    int invalid_subframes = 0;
};

enum class ReceiverKind { Hybrid, Baseline };

TrialRecord run_link_trial(const LinkScenario& scenario, const LatencyModel& latency,
                           int subframes, std::uint64_t seed,
                           ReceiverKind kind = ReceiverKind::Hybrid);

struct AbSummary {
    double hybrid_mean_snr_db = 0.0;
    double baseline_mean_snr_db = 0.0;
    double gain_db = 0.0;
    double oracle_gain_db = 0.0; // from exact_correlation, for reference
};

/// Hybrid vs conventional single-antenna receiver on a common channel and
/// noise stream; SNRs averaged over the last half of the trial.
AbSummary run_ab_comparison(const LinkScenario& scenario, const LatencyModel& latency,
                            int subframes, std::uint64_t seed);

struct TrajectorySummary {
    TrialRecord record;
    double tracked_fraction = 0.0; // subframes under the threshold, post-transient
};

TrajectorySummary run_trajectory_test(const LinkScenario& scenario, const LatencyModel& latency,
                                      int subframes, std::uint64_t seed);

/// CSV body for a TrialRecord (header row + data rows, RFC-4180 fields).
std::string trial_csv(const TrialRecord& record);

} // namespace hbf

#endif
