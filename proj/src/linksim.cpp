#include "hbf/linksim.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hbf {

namespace {

constexpr int kSubframesPerHalfFrame = 5;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

std::vector<PathCluster> scale_by_element(const std::vector<PathCluster>& clusters,
                                          const ElementPattern& pattern, double boresight_az,
                                          double boresight_el) {
    if (pattern.isotropic()) return clusters;
    std::vector<PathCluster> out = clusters;
    for (auto& cl : out)
        cl.power_fraction *= pattern.power_gain(cl.azimuth, cl.elevation, boresight_az, boresight_el);
    return out;
}

struct PeriodPlan {
    int period_sf;     // subframes per applied weight
    int obs_window;    // leading subframes whose power feeds the decision
    int abandoned_sf;  // leading subframes without decode statistics
};

PeriodPlan make_plan(const LatencyModel& latency) {
    latency.validate();
    PeriodPlan plan;
    plan.period_sf = latency.update_period_half_frames * kSubframesPerHalfFrame;
    const int delay_sf = static_cast<int>(std::ceil(latency.total_ms()));
    plan.obs_window = std::max(1, plan.period_sf - delay_sf);
    plan.abandoned_sf = latency.abandoned_half_frames * kSubframesPerHalfFrame;
    return plan;
}

} // namespace

void LatencyModel::validate() const {
    if (tcpip_ms < 0.0 || control_program_ms < 0.0 || ru_apply_ms < 0.0)
        throw std::invalid_argument("LatencyModel: negative delay");
    const int min_period = static_cast<int>(std::ceil(total_ms() / 5.0));
    if (update_period_half_frames < std::max(1, min_period))
        throw std::invalid_argument("LatencyModel: update period shorter than the control delay");
    if (abandoned_half_frames < 0 || abandoned_half_frames >= update_period_half_frames * 1 + 3)
        throw std::invalid_argument("LatencyModel: bad abandoned half-frame count");
}

LatencyModel ideal_latency() {
    LatencyModel m;
    m.tcpip_ms = 0.0;
    m.control_program_ms = 0.0;
    m.ru_apply_ms = 0.0;
    m.update_period_half_frames = 1;
    m.abandoned_half_frames = 0;
    return m;
}

TrialRecord run_link_trial(const LinkScenario& scenario, const LatencyModel& latency,
                           int subframes, std::uint64_t seed, ReceiverKind kind) {
    const Numerology& num = scenario.numerology;
    num.validate();
    const PeriodPlan plan = make_plan(latency);
    const bool baseline = kind == ReceiverKind::Baseline;

    const ArrayGeometry geometry = baseline ? ArrayGeometry{1, 1, 0.6} : scenario.geometry;
    const SubcarrierGrid grid = num.active_grid();

    Rng rng_tracker = Rng::derive(seed, 1);
    Rng rng_noise = Rng::derive(seed, 2);
    Rng rng_data = Rng::derive(seed, 3);
    std::uint64_t seed_state = seed ^ 0x4cull;
    const std::uint64_t channel_seed = splitmix64(seed_state);

    BeamTracker tracker(geometry.size(), scenario.tracker, rng_tracker);

    TrialRecord record;
    record.scenario_id = scenario.id;
    record.seed = seed;

    auto effective_clusters = [&](int t) {
        std::vector<PathCluster> cl =
            scenario.trajectory ? evolve_trajectory(*scenario.trajectory, t) : scenario.clusters;
        // the element pattern weighs each arriving cluster for the array
        // elements and the baseline antenna alike
        return scale_by_element(cl, scenario.element, scenario.baseline_boresight_az,
                                scenario.baseline_boresight_el);
    };

    // oracle bookkeeping (recomputed only when the cluster set changes)
    CMat r_matrix = exact_correlation(effective_clusters(0), geometry);
    double lambda_max = eigen_oracle(r_matrix).value;
    const bool moving = scenario.trajectory.has_value();

    // probe/weight pipeline (the baseline receiver has no tracker)
    ProbePair pair;
    bool probe_is_plus = true;
    std::optional<PowerObservation> obs_plus;
    CVec pending_raw = CVec::Ones(1);     // decided, not yet applied
    if (!baseline) {
        pair = tracker.perturb();
        pending_raw = pair.plus;
    }
    double pending_computed_ms = 0.0;
    double pending_latest_obs_ms = 0.0;

    CVec applied_raw;
    CVec applied;
    int weight_id = 0;

    double power_acc = 0.0;
    int power_count = 0;

    const int bits_pss = data_capacity_bits(num, scenario.modulation, 0);
    const int bits_plain = data_capacity_bits(num, scenario.modulation, 1);

    for (int t = 0; t < subframes; ++t) {
        const int in_period = t % plan.period_sf;
        if (in_period == 0) {
            if (baseline) {
                applied_raw = CVec::Ones(1);
                applied = applied_raw;
            } else {
                applied_raw = pending_raw;
                applied = scenario.quantize ? quantize_weight(applied_raw, scenario.hardware)
                                            : applied_raw;
            }
            ++weight_id;
            WeightEvent ev;
            ev.weight_id = weight_id;
            ev.applied_at_ms = static_cast<double>(t);
            ev.computed_at_ms = pending_computed_ms;
            ev.latest_observation_ms = pending_latest_obs_ms;
            record.weight_events.push_back(ev);
            power_acc = 0.0;
            power_count = 0;
        }

        const std::vector<PathCluster> clusters_t = effective_clusters(t);
        if (moving && t > 0) {
            r_matrix = exact_correlation(clusters_t, geometry);
            lambda_max = eigen_oracle(r_matrix).value;
        }

        const SpatialChannel channel =
            generate_channel(clusters_t, geometry, grid, t, channel_seed, scenario.fading);

        // beamformed per-subcarrier channel
        const int subframe_in_frame = t % num.subframes_per_frame();
        ResourceGrid tx;
        {
            const int nbits = subframe_has_pss(subframe_in_frame) ? bits_pss : bits_plain;
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(nbits));
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng_data.next_u64() & 1);
            tx = make_subframe_grid(num, scenario.modulation, subframe_in_frame, bits, 2 * t);
        }
        const double amp = std::sqrt(scenario.tx_power);
        for (int a = 0; a < num.active_subcarriers; ++a) {
            const cplx hbb = apply_weight(applied, channel.h.col(a));
            tx.re.row(a) *= amp * hbb;
        }

        std::vector<cplx> samples = ofdm_modulate(num, tx);
        add_awgn(samples, scenario.noise_power * applied.squaredNorm(), rng_noise);

        bool subframe_valid = true;
        if (t == 0) {
            // one-shot timing acquisition on a planted offset
            std::vector<cplx> shifted(static_cast<std::size_t>(scenario.sync_plant_offset),
                                      cplx(0.0, 0.0));
            add_awgn(shifted, scenario.noise_power * applied.squaredNorm(), rng_noise);
            shifted.insert(shifted.end(), samples.begin(), samples.end());
            FilterSpec lpf_spec;
            if (lpf_spec.stopband_edge_hz >= 0.5 * num.sample_rate_hz) {
                // default edges assume the full-rate numerology; keep the
                // same shape (relative to the rate) for narrowband setups
                lpf_spec.cutoff_hz = 0.30 * num.sample_rate_hz;
                lpf_spec.stopband_edge_hz = 0.45 * num.sample_rate_hz;
            }
            const std::vector<double> taps = design_lpf(lpf_spec, num.sample_rate_hz);
            PssCorrelator correlator(num, taps);
            const SyncResult sync = correlator.locate(shifted);
            const long expected = scenario.sync_plant_offset +
                                  (num.symbols_per_slot - 1) * num.samples_per_symbol() +
                                  num.cp_samples;
            record.sync_offset = sync.offset;
            // dispersive channels can pull the correlation apex slightly
            // before the nominal first-path sample or onto a later ray; any
            // timing in this window keeps the symbols ISI-free
            record.sync_ok = sync.ok && sync.offset >= expected - num.cp_samples / 2 &&
                             sync.offset < expected + num.cp_samples;
            if (!record.sync_ok) {
                subframe_valid = false;
                ++record.invalid_subframes;
            }
        }

        const ResourceGrid ref = reference_grid(num, subframe_in_frame, 2 * t);
        const ResourceGrid rx = ofdm_demodulate(num, samples, subframe_in_frame, 2 * t);
        const SnrResult snr = measure_snr(num, rx, ref);

        TrialRow row;
        row.subframe = t;
        row.weight_id = weight_id;
        row.valid = subframe_valid;
        row.snr_db = snr.snr_db;
        row.oracle_db =
            10.0 * std::log10(scenario.tx_power * lambda_max / scenario.noise_power + 1e-300);
        row.gap_db = optimality_gap(applied, r_matrix, lambda_max);
        if (in_period >= plan.abandoned_sf && subframe_valid) {
            const CMat est = estimate_channel(num, rx, ref);
            row.evm_db = equalize_zf(num, rx, est, scenario.modulation).evm_db;
        } else {
            row.evm_db = nan_value();
        }
        record.rows.push_back(row);

        // power observations feed the tracker even on abandoned half-frames
        if (!baseline && in_period < plan.obs_window) {
            // normalize out the analog combining gain of the applied weight so
            // the plus/minus probes are compared on direction alone
            power_acc += snr.signal_power / applied.squaredNorm();
            ++power_count;
            if (in_period == plan.obs_window - 1) {
                PowerObservation obs;
                obs.weight = applied;
                obs.mean_power = power_acc / power_count;
                obs.subframe_index = t;
                if (probe_is_plus) {
                    obs_plus = obs;
                    pending_raw = pair.minus;
                } else {
                    tracker.observe_pair(*obs_plus, obs, pair.direction);
                    pair = tracker.perturb();
                    pending_raw = pair.plus;
                }
                probe_is_plus = !probe_is_plus;
                pending_computed_ms = static_cast<double>(t + 1);
                pending_latest_obs_ms = static_cast<double>(t + 1);
            }
        }
    }
    return record;
}

namespace {
double tail_mean_linear_snr_db(const TrialRecord& record) {
    const std::size_t start = record.rows.size() / 2;
    double acc = 0.0;
    int count = 0;
    for (std::size_t i = start; i < record.rows.size(); ++i) {
        if (!record.rows[i].valid) continue;
        acc += std::pow(10.0, record.rows[i].snr_db / 10.0);
        ++count;
    }
    return count > 0 ? 10.0 * std::log10(acc / count) : nan_value();
}
} // namespace

AbSummary run_ab_comparison(const LinkScenario& scenario, const LatencyModel& latency,
                            int subframes, std::uint64_t seed) {
    const TrialRecord hybrid = run_link_trial(scenario, latency, subframes, seed, ReceiverKind::Hybrid);
    const TrialRecord base = run_link_trial(scenario, latency, subframes, seed, ReceiverKind::Baseline);

    AbSummary summary;
    summary.hybrid_mean_snr_db = tail_mean_linear_snr_db(hybrid);
    summary.baseline_mean_snr_db = tail_mean_linear_snr_db(base);
    summary.gain_db = summary.hybrid_mean_snr_db - summary.baseline_mean_snr_db;

    auto clusters = scenario.trajectory ? evolve_trajectory(*scenario.trajectory, 0)
                                        : scenario.clusters;
    const auto scaled = [&](const std::vector<PathCluster>& cl) {
        std::vector<PathCluster> out = cl;
        if (!scenario.element.isotropic())
            for (auto& c : out)
                c.power_fraction *= scenario.element.power_gain(
                    c.azimuth, c.elevation, scenario.baseline_boresight_az,
                    scenario.baseline_boresight_el);
        return out;
    }(clusters);
    const double lambda = eigen_oracle(exact_correlation(scaled, scenario.geometry)).value;
    double base_power = 0.0;
    for (const auto& c : scaled) base_power += c.power_fraction;
    summary.oracle_gain_db = 10.0 * std::log10(lambda / base_power);
    return summary;
}

TrajectorySummary run_trajectory_test(const LinkScenario& scenario, const LatencyModel& latency,
                                      int subframes, std::uint64_t seed) {
    TrajectorySummary summary;
    summary.record = run_link_trial(scenario, latency, subframes, seed);
    const int transient = 300;
    int tracked = 0, total = 0;
    for (const auto& row : summary.record.rows) {
        if (row.subframe < transient) continue;
        ++total;
        if (row.gap_db < scenario.tracking_threshold_db) ++tracked;
    }
    summary.tracked_fraction = total > 0 ? static_cast<double>(tracked) / total : 0.0;
    return summary;
}

std::string trial_csv(const TrialRecord& record) {
    std::ostringstream out;
    out << "subframe,weight_id,snr_db,oracle_db,gap_db,evm_db\n";
    char buf[160];
    for (const auto& row : record.rows) {
        if (std::isnan(row.evm_db)) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,\n", row.subframe,
                          row.weight_id, row.snr_db, row.oracle_db, row.gap_db);
        } else {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,%.6f\n", row.subframe,
                          row.weight_id, row.snr_db, row.oracle_db, row.gap_db, row.evm_db);
        }
        out << buf;
    }
    return out.str();
}

} // namespace hbf
