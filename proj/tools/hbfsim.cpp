#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include "hbf/config.hpp"
#include "hbf/linksim.hpp"
#include "hbf/phy.hpp"
#include "hbf/syssim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

int effective_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string metadata_header(const hbf::ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "# config_hash=" << std::hex << cfg.hash() << std::dec << " seed=" << cfg.seed
        << " version=" << kVersion << "\n";
    const auto now = std::chrono::system_clock::now();
    out << "# timestamp=" << std::chrono::duration_cast<std::chrono::seconds>(
                                 now.time_since_epoch())
                                 .count()
        << "\n";
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

json ab_to_json(const hbf::AbSummary& s) {
    return json{{"hybrid_mean_snr_db", s.hybrid_mean_snr_db},
                {"baseline_mean_snr_db", s.baseline_mean_snr_db},
                {"gain_db", s.gain_db},
                {"oracle_gain_db", s.oracle_gain_db}};
}

int cmd_link(const hbf::ScenarioConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const hbf::LatencyModel latency = cfg.resolved_latency();
    const int workers = effective_workers(cfg.workers);

    json summary;
    summary["config_hash"] = cfg.hash();
    summary["seed"] = cfg.seed;
    summary["version"] = kVersion;

    if (cfg.mode == hbf::LinkMode::Static || cfg.mode == hbf::LinkMode::Trajectory) {
        hbf::LinkScenario scenario = cfg.resolved_link(cfg.seed);
        if (cfg.mode == hbf::LinkMode::Static) scenario.trajectory.reset();
        const hbf::TrialRecord record =
            cfg.mode == hbf::LinkMode::Static
                ? hbf::run_link_trial(scenario, latency, cfg.subframes, cfg.seed)
                : hbf::run_trajectory_test(scenario, latency, cfg.subframes, cfg.seed).record;
        write_file(out_dir / "link_trial.csv", metadata_header(cfg) + hbf::trial_csv(record));
        summary["sync_ok"] = record.sync_ok;
        summary["invalid_subframes"] = record.invalid_subframes;
        double final_gap = 0.0;
        if (!record.rows.empty()) final_gap = record.rows.back().gap_db;
        summary["final_gap_db"] = final_gap;
        if (cfg.mode == hbf::LinkMode::Trajectory) {
            const auto traj = hbf::run_trajectory_test(scenario, latency, cfg.subframes, cfg.seed);
            summary["tracked_fraction"] = traj.tracked_fraction;
        }
        if (cfg.iq_dump) {
            // one illustrative subframe worth of the tx waveform
            hbf::Rng rng(cfg.seed);
            const int nbits = hbf::data_capacity_bits(scenario.numerology, scenario.modulation, 0);
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(nbits));
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
            const auto grid =
                hbf::make_subframe_grid(scenario.numerology, scenario.modulation, 0, bits);
            hbf::write_iq_file((out_dir / "subframe0.iq").string(),
                               hbf::ofdm_modulate(scenario.numerology, grid),
                               scenario.numerology.sample_rate_hz);
        }
    } else {
        // A/B ensemble over per-trial seed streams
        std::vector<std::future<hbf::AbSummary>> futures;
        std::vector<hbf::AbSummary> results(static_cast<std::size_t>(cfg.ensemble_seeds));
        std::atomic<int> next{0};
        auto run = [&]() {
            for (int i = next.fetch_add(1); i < cfg.ensemble_seeds; i = next.fetch_add(1)) {
                std::uint64_t state = cfg.seed ^ (0x6a09e667f3bcc909ULL * (i + 1));
                const std::uint64_t trial_seed = hbf::splitmix64(state);
                results[static_cast<std::size_t>(i)] = hbf::run_ab_comparison(
                    cfg.resolved_link(trial_seed), latency, cfg.subframes, trial_seed);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min(workers, cfg.ensemble_seeds); ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();

        json per_seed = json::array();
        double mean_gain = 0.0, mean_oracle = 0.0;
        int positive = 0;
        for (const auto& s : results) {
            per_seed.push_back(ab_to_json(s));
            mean_gain += s.gain_db;
            mean_oracle += s.oracle_gain_db;
            if (s.gain_db > 0.0) ++positive;
        }
        summary["trials"] = per_seed;
        summary["mean_gain_db"] = mean_gain / cfg.ensemble_seeds;
        summary["mean_oracle_gain_db"] = mean_oracle / cfg.ensemble_seeds;
        summary["positive_gain_fraction"] =
            static_cast<double>(positive) / cfg.ensemble_seeds;
    }

    write_file(out_dir / "link_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_system(const hbf::ScenarioConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const int workers = effective_workers(cfg.workers);
    const hbf::SystemResult result = hbf::run_system_eval(
        cfg.deployment, cfg.propagation, cfg.drops, cfg.ms_per_floor, cfg.seed, workers);

    json summary;
    summary["config_hash"] = cfg.hash();
    summary["seed"] = cfg.seed;
    summary["version"] = kVersion;
    summary["drops"] = cfg.drops;
    summary["regularized_count"] = result.regularized_count;

    for (int v = 0; v < hbf::kVariantCount; ++v) {
        const auto variant = static_cast<hbf::SystemVariant>(v);
        const auto& samples = result.rates[static_cast<std::size_t>(v)];
        const auto cdf = hbf::empirical_cdf(samples);
        std::ostringstream csv;
        csv << "rate_bps,cdf\n";
        char buf[64];
        for (const auto& [rate, p] : cdf) {
            std::snprintf(buf, sizeof(buf), "%.3f,%.8f\n", rate, p);
            csv << buf;
        }
        write_file(out_dir / ("rate_cdf_" + hbf::variant_name(variant) + ".csv"),
                   metadata_header(cfg) + csv.str());

        auto pct = [&](double q) {
            if (samples.empty()) return 0.0;
            const std::size_t i = static_cast<std::size_t>(q * (samples.size() - 1));
            return samples[i];
        };
        summary[hbf::variant_name(variant)] = {
            {"mean_rate_bps", result.mean_rate_bps[static_cast<std::size_t>(v)]},
            {"p05_bps", pct(0.05)},
            {"p50_bps", pct(0.50)},
            {"p95_bps", pct(0.95)},
            {"samples", samples.size()}};
    }
    write_file(out_dir / "system_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct SelfCheck {
    std::string name;
    bool pass;
};

int cmd_selftest(bool inject_fault) {
    std::vector<SelfCheck> checks;
    const hbf::Numerology num;

    {
        hbf::CVec zc = hbf::zadoff_chu(25);
        if (inject_fault) zc(7) = -zc(7); // test hook
        bool ok = true;
        for (int n = 0; n < 63 && ok; ++n) ok = std::abs(std::abs(zc(n)) - 1.0) < 1e-12;
        for (int tau = 0; tau < 63 && ok; ++tau) {
            hbf::cplx acc(0.0, 0.0);
            for (int n = 0; n < 63; ++n) acc += zc(n) * std::conj(zc((n + tau) % 63));
            ok = tau == 0 ? std::abs(std::abs(acc) - 63.0) < 1e-9 : std::abs(acc) < 1e-9;
        }
        checks.push_back({"zadoff_chu_autocorrelation", ok});
    }
    {
        bool ok = true;
        try {
            hbf::design_lpf(hbf::FilterSpec{}, num.sample_rate_hz);
        } catch (const std::exception&) {
            ok = false;
        }
        checks.push_back({"lpf_mask", ok});
    }
    {
        hbf::Rng rng(7);
        bool ok = true;
        for (int trial = 0; trial < 20 && ok; ++trial) {
            hbf::CMat a(6, 6);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) a(i, j) = rng.cgaussian();
            const hbf::CMat r = a * a.adjoint();
            const auto mine = hbf::eigen_oracle(r);
            Eigen::SelfAdjointEigenSolver<hbf::CMat> dense(r);
            const double ref = dense.eigenvalues().maxCoeff();
            ok = std::abs(mine.value - ref) < 1e-8 * ref;
        }
        checks.push_back({"eigen_oracle", ok});
    }
    {
        hbf::Rng rng(11);
        const hbf::RfHardwareModel hw;
        bool ok = true;
        for (int trial = 0; trial < 200 && ok; ++trial) {
            hbf::CVec w = hbf::random_unit_weight(6, rng);
            const hbf::CVec q = hbf::quantize_weight(w, hw);
            for (int k = 0; k < 6 && ok; ++k) {
                double dp = std::abs(std::arg(q(k) * std::conj(w(k))));
                ok = dp <= (11.25 + 1e-9) * 3.14159265358979323846 / 180.0;
            }
        }
        checks.push_back({"quantizer_phase_bound", ok});
    }
    {
        // OFDM loopback through an ideal channel
        hbf::Rng rng(3);
        const int nbits = hbf::data_capacity_bits(num, hbf::Modulation::Qam64, 1);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(nbits));
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
        const auto tx = hbf::make_subframe_grid(num, hbf::Modulation::Qam64, 1, bits);
        const auto samples = hbf::ofdm_modulate(num, tx);
        const auto rx = hbf::ofdm_demodulate(num, samples, 1);
        const double err = (rx.re - tx.re).cwiseAbs().maxCoeff();
        checks.push_back({"ofdm_loopback", err < 1e-9});
    }

    bool all = true;
    for (const auto& c : checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "\n";
        all = all && c.pass;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D hybrid beamforming link/system simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = ".";
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    int subframes_override = 0;
    int drops_override = 0;
    int workers_override = 0;
    bool inject_fault = false;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", scenario_path, "scenario config file")->required();
        cmd->add_option("--seed", seed_override, "master seed override")
            ->each([&](const std::string&) { have_seed = true; });
        cmd->add_option("--subframes", subframes_override, "subframe count override");
        cmd->add_option("--drops", drops_override, "drop count override");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--workers", workers_override, "worker pool size (0 = cores)");
    };

    CLI::App* link = app.add_subcommand("link", "run a link-level experiment");
    add_common(link, true);
    CLI::App* system = app.add_subcommand("system", "run the system-level rate evaluation");
    add_common(system, true);
    CLI::App* selftest = app.add_subcommand("selftest", "run the fast invariant suite");
    selftest->add_flag("--inject-fault", inject_fault)->group(""); // test hook

    CLI11_PARSE(app, argc, argv);

    try {
        if (selftest->parsed()) return cmd_selftest(inject_fault);

        hbf::ScenarioConfig cfg;
        try {
            cfg = hbf::ScenarioConfig::parse_file(scenario_path);
        } catch (const hbf::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
        if (have_seed) cfg.seed = seed_override;
        if (subframes_override > 0) cfg.subframes = subframes_override;
        if (drops_override > 0) cfg.drops = drops_override;
        if (workers_override > 0) cfg.workers = workers_override;

        if (link->parsed()) return cmd_link(cfg, out_dir);
        if (system->parsed()) return cmd_system(cfg, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
