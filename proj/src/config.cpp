#include "hbf/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hbf {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line;
    bool consumed = false;
};

using Section = std::map<std::string, Entry>;

struct ParsedFile {
    std::map<std::string, Section> sections;
    std::string origin;

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
    }
};

class Reader {
  public:
    Reader(ParsedFile& file, const std::string& section) : file_(file), section_(section) {}

    std::optional<std::string> raw(const std::string& key) {
        auto sec = file_.sections.find(section_);
        if (sec == file_.sections.end()) return std::nullopt;
        auto it = sec->second.find(key);
        if (it == sec->second.end()) return std::nullopt;
        it->second.consumed = true;
        return it->second.value;
    }

    void get(const std::string& key, double& out) {
        if (auto v = raw(key)) out = parse_double(key, *v);
    }
    void get(const std::string& key, int& out) {
        if (auto v = raw(key)) out = static_cast<int>(std::llround(parse_double(key, *v)));
    }
    void get(const std::string& key, std::uint64_t& out) {
        if (auto v = raw(key)) {
            try {
                out = std::stoull(*v);
            } catch (...) {
                fail(key, "expected an unsigned integer, got '" + *v + "'");
            }
        }
    }
    void get(const std::string& key, bool& out) {
        if (auto v = raw(key)) {
            if (*v == "true" || *v == "1") out = true;
            else if (*v == "false" || *v == "0") out = false;
            else fail(key, "expected true/false, got '" + *v + "'");
        }
    }
    void get(const std::string& key, std::string& out) {
        if (auto v = raw(key)) out = *v;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) {
        int line = 0;
        auto sec = file_.sections.find(section_);
        if (sec != file_.sections.end()) {
            auto it = sec->second.find(key);
            if (it != sec->second.end()) line = it->second.line;
        }
        file_.fail(line, "[" + section_ + "] " + key + ": " + msg);
    }

  private:
    double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            return d;
        } catch (...) {
            fail(key, "expected a number, got '" + v + "'");
        }
    }

    ParsedFile& file_;
    std::string section_;
};

ParsedFile tokenize(const std::string& text, const std::string& origin) {
    ParsedFile file;
    file.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') file.fail(lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            file.sections[section]; // sections may be empty
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) file.fail(lineno, "expected 'key = value'");
        if (section.empty()) file.fail(lineno, "key outside any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) file.fail(lineno, "empty key");
        auto [it, inserted] = file.sections[section].emplace(key, Entry{value, lineno});
        if (!inserted) file.fail(lineno, "duplicate key '" + key + "'");
    }
    return file;
}

Modulation parse_modulation(Reader& r, const std::string& key, Modulation fallback) {
    std::string v;
    r.get(key, v);
    if (v.empty()) return fallback;
    if (v == "qpsk" || v == "4qam") return Modulation::Qpsk;
    if (v == "16qam") return Modulation::Qam16;
    if (v == "64qam") return Modulation::Qam64;
    r.fail(key, "expected qpsk|16qam|64qam, got '" + v + "'");
}

std::string modulation_name(Modulation m) {
    switch (m) {
        case Modulation::Qpsk: return "qpsk";
        case Modulation::Qam16: return "16qam";
        case Modulation::Qam64: return "64qam";
    }
    return "16qam";
}

const std::map<std::string, std::vector<std::string>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>> keys = {
        {"general", {"seed", "mode", "subframes", "drops", "ms_per_floor", "workers", "ensemble_seeds"}},
        {"array", {"rows", "cols", "spacing"}},
        {"hardware",
         {"phase_bits", "amplitude_bits", "amplitude_step_db", "update_delay_ms", "quantize"}},
        {"element", {"cosine_exponent", "front_to_back_db", "boresight_azimuth_deg",
                     "boresight_elevation_deg"}},
        {"channel",
         {"clusters", "mean_azimuth_deg", "mean_elevation_deg", "angle_spread_deg",
          "delay_spread_ns", "doppler_rate", "innovation_coherence"}},
        {"trajectory", {"enabled", "delta_azimuth_deg", "duration_subframes"}},
        {"tracker", {"alpha0", "tau_alpha", "delta", "smoothing"}},
        {"latency",
         {"ideal", "tcpip_ms", "control_program_ms", "ru_apply_ms", "update_period_half_frames",
          "abandoned_half_frames"}},
        {"link",
         {"modulation", "tx_power", "noise_power", "sync_plant_offset", "tracking_threshold_db"}},
        {"deployment",
         {"bs_per_floor", "floors", "floor_x_m", "floor_y_m", "floor_height_m", "ms_height_m",
          "tx_power_dbm", "subarray_rows", "subarray_cols", "quantize"}},
        {"propagation",
         {"exponent", "ref_loss_db", "floor_penetration_db", "shadowing_sigma_db",
          "noise_figure_db", "clusters_per_link", "angle_spread_deg"}},
        {"output", {"iq_dump"}},
    };
    return keys;
}

// explicit cluster lines: [channel] cluster_0 = az_deg el_deg power delay_ns
bool is_cluster_key(const std::string& key) { return key.rfind("cluster_", 0) == 0; }

void reject_unknown(const ParsedFile& file) {
    const auto& known = known_keys();
    for (const auto& [sec_name, sec] : file.sections) {
        auto ks = known.find(sec_name);
        if (ks == known.end()) {
            int line = sec.empty() ? 0 : sec.begin()->second.line;
            file.fail(line, "unknown section [" + sec_name + "]");
        }
        for (const auto& [key, entry] : sec) {
            if (entry.consumed) continue;
            if (sec_name == "channel" && is_cluster_key(key)) continue;
            file.fail(entry.line, "unknown key '" + key + "' in section [" + sec_name + "]");
        }
    }
}

} // namespace

ScenarioConfig ScenarioConfig::parse_string(const std::string& text, const std::string& origin) {
    ParsedFile file = tokenize(text, origin);
    ScenarioConfig cfg;

    {
        Reader r(file, "general");
        bool have_seed = false;
        if (auto v = r.raw("seed")) {
            try {
                cfg.seed = std::stoull(*v);
                have_seed = true;
            } catch (...) {
                r.fail("seed", "expected an unsigned integer, got '" + *v + "'");
            }
        }
        if (!have_seed)
            throw ConfigError(origin + ":0: missing required key 'seed' in section [general]");
        std::string mode;
        r.get("mode", mode);
        if (mode == "ab") cfg.mode = LinkMode::Ab;
        else if (mode == "trajectory") cfg.mode = LinkMode::Trajectory;
        else if (mode == "static" || mode.empty()) cfg.mode = LinkMode::Static;
        else r.fail("mode", "expected static|ab|trajectory, got '" + mode + "'");
        r.get("subframes", cfg.subframes);
        r.get("drops", cfg.drops);
        r.get("ms_per_floor", cfg.ms_per_floor);
        r.get("workers", cfg.workers);
        r.get("ensemble_seeds", cfg.ensemble_seeds);
    }
    {
        Reader r(file, "array");
        r.get("rows", cfg.link.geometry.rows);
        r.get("cols", cfg.link.geometry.cols);
        r.get("spacing", cfg.link.geometry.spacing_wavelengths);
    }
    {
        Reader r(file, "hardware");
        r.get("phase_bits", cfg.link.hardware.phase_bits);
        r.get("amplitude_bits", cfg.link.hardware.amplitude_bits);
        r.get("amplitude_step_db", cfg.link.hardware.amplitude_step_db);
        r.get("update_delay_ms", cfg.link.hardware.update_delay_ms);
        r.get("quantize", cfg.link.quantize);
    }
    {
        Reader r(file, "element");
        r.get("cosine_exponent", cfg.link.element.cosine_exponent);
        r.get("front_to_back_db", cfg.link.element.front_to_back_db);
        double az = cfg.link.baseline_boresight_az / kDegToRad;
        double el = cfg.link.baseline_boresight_el / kDegToRad;
        r.get("boresight_azimuth_deg", az);
        r.get("boresight_elevation_deg", el);
        cfg.link.baseline_boresight_az = az * kDegToRad;
        cfg.link.baseline_boresight_el = el * kDegToRad;
    }
    {
        Reader r(file, "channel");
        r.get("clusters", cfg.cluster_count);
        r.get("mean_azimuth_deg", cfg.mean_azimuth_deg);
        r.get("mean_elevation_deg", cfg.mean_elevation_deg);
        r.get("angle_spread_deg", cfg.angle_spread_deg);
        r.get("delay_spread_ns", cfg.delay_spread_ns);
        r.get("doppler_rate", cfg.doppler_rate);
        r.get("innovation_coherence", cfg.link.fading.innovation_coherence);
        // explicit clusters
        for (int i = 0;; ++i) {
            auto v = r.raw("cluster_" + std::to_string(i));
            if (!v) break;
            std::istringstream ss(*v);
            PathCluster cl;
            double az_deg, el_deg, delay_ns;
            if (!(ss >> az_deg >> el_deg >> cl.power_fraction >> delay_ns))
                r.fail("cluster_" + std::to_string(i),
                       "expected 'az_deg el_deg power delay_ns', got '" + *v + "'");
            cl.azimuth = az_deg * kDegToRad;
            cl.elevation = el_deg * kDegToRad;
            cl.delay_s = delay_ns * 1e-9;
            cl.doppler_phase_rate = cfg.doppler_rate * (i + 1);
            cfg.link.clusters.push_back(cl);
            cfg.explicit_clusters = true;
        }
    }
    {
        Reader r(file, "trajectory");
        r.get("enabled", cfg.trajectory_enabled);
        r.get("delta_azimuth_deg", cfg.trajectory_delta_azimuth_deg);
        r.get("duration_subframes", cfg.trajectory_duration_subframes);
    }
    {
        Reader r(file, "tracker");
        r.get("alpha0", cfg.link.tracker.alpha0);
        r.get("tau_alpha", cfg.link.tracker.tau_alpha);
        r.get("delta", cfg.link.tracker.delta);
        r.get("smoothing", cfg.link.tracker.smoothing);
    }
    {
        Reader r(file, "latency");
        r.get("ideal", cfg.latency_ideal);
        r.get("tcpip_ms", cfg.latency.tcpip_ms);
        r.get("control_program_ms", cfg.latency.control_program_ms);
        r.get("ru_apply_ms", cfg.latency.ru_apply_ms);
        r.get("update_period_half_frames", cfg.latency.update_period_half_frames);
        r.get("abandoned_half_frames", cfg.latency.abandoned_half_frames);
    }
    {
        Reader r(file, "link");
        cfg.link.modulation = parse_modulation(r, "modulation", cfg.link.modulation);
        r.get("tx_power", cfg.link.tx_power);
        r.get("noise_power", cfg.link.noise_power);
        r.get("sync_plant_offset", cfg.link.sync_plant_offset);
        r.get("tracking_threshold_db", cfg.link.tracking_threshold_db);
    }
    {
        Reader r(file, "deployment");
        int bs_per_floor = 5;
        r.get("bs_per_floor", bs_per_floor);
        r.get("floors", cfg.deployment.floor.floors);
        r.get("floor_x_m", cfg.deployment.floor.x_m);
        r.get("floor_y_m", cfg.deployment.floor.y_m);
        r.get("floor_height_m", cfg.deployment.floor.floor_height_m);
        r.get("ms_height_m", cfg.deployment.floor.ms_height_m);
        r.get("tx_power_dbm", cfg.deployment.tx_power_dbm);
        r.get("subarray_rows", cfg.deployment.subarray.rows);
        r.get("subarray_cols", cfg.deployment.subarray.cols);
        r.get("quantize", cfg.deployment.quantize);
        cfg.deployment.hardware = cfg.link.hardware;
        cfg.deployment.element = cfg.link.element;
        // BS positions: the five-spot pattern of the default layout, per floor
        cfg.deployment.bs.clear();
        const Deployment pattern = default_deployment();
        for (int f = 0; f < cfg.deployment.floor.floors; ++f)
            for (int b = 0; b < bs_per_floor; ++b) {
                BaseStation bs = pattern.bs[static_cast<std::size_t>(b % 5)];
                bs.x_m *= cfg.deployment.floor.x_m / 50.0;
                bs.y_m *= cfg.deployment.floor.y_m / 30.0;
                bs.floor = f;
                cfg.deployment.bs.push_back(bs);
            }
    }
    {
        Reader r(file, "propagation");
        r.get("exponent", cfg.propagation.pathloss_exponent);
        r.get("ref_loss_db", cfg.propagation.ref_loss_db);
        r.get("floor_penetration_db", cfg.propagation.floor_penetration_db);
        r.get("shadowing_sigma_db", cfg.propagation.shadowing_sigma_db);
        r.get("noise_figure_db", cfg.propagation.noise_figure_db);
        r.get("clusters_per_link", cfg.propagation.clusters_per_link);
        double spread_deg = cfg.propagation.angle_spread_rad / kDegToRad;
        r.get("angle_spread_deg", spread_deg);
        cfg.propagation.angle_spread_rad = spread_deg * kDegToRad;
    }
    {
        Reader r(file, "output");
        r.get("iq_dump", cfg.iq_dump);
    }

    reject_unknown(file);
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

std::string ScenarioConfig::serialize() const {
    std::ostringstream out;
    out.precision(12);
    const char* mode_name = mode == LinkMode::Ab ? "ab"
                            : mode == LinkMode::Trajectory ? "trajectory"
                                                           : "static";
    out << "[general]\n"
        << "seed = " << seed << "\n"
        << "mode = " << mode_name << "\n"
        << "subframes = " << subframes << "\n"
        << "drops = " << drops << "\n"
        << "ms_per_floor = " << ms_per_floor << "\n"
        << "workers = " << workers << "\n"
        << "ensemble_seeds = " << ensemble_seeds << "\n";
    out << "[array]\n"
        << "rows = " << link.geometry.rows << "\n"
        << "cols = " << link.geometry.cols << "\n"
        << "spacing = " << link.geometry.spacing_wavelengths << "\n";
    out << "[hardware]\n"
        << "phase_bits = " << link.hardware.phase_bits << "\n"
        << "amplitude_bits = " << link.hardware.amplitude_bits << "\n"
        << "amplitude_step_db = " << link.hardware.amplitude_step_db << "\n"
        << "update_delay_ms = " << link.hardware.update_delay_ms << "\n"
        << "quantize = " << (link.quantize ? "true" : "false") << "\n";
    out << "[element]\n"
        << "cosine_exponent = " << link.element.cosine_exponent << "\n"
        << "front_to_back_db = " << link.element.front_to_back_db << "\n"
        << "boresight_azimuth_deg = " << link.baseline_boresight_az / kDegToRad << "\n"
        << "boresight_elevation_deg = " << link.baseline_boresight_el / kDegToRad << "\n";
    out << "[channel]\n"
        << "clusters = " << cluster_count << "\n"
        << "mean_azimuth_deg = " << mean_azimuth_deg << "\n"
        << "mean_elevation_deg = " << mean_elevation_deg << "\n"
        << "angle_spread_deg = " << angle_spread_deg << "\n"
        << "delay_spread_ns = " << delay_spread_ns << "\n"
        << "doppler_rate = " << doppler_rate << "\n"
        << "innovation_coherence = " << link.fading.innovation_coherence << "\n";
    if (explicit_clusters) {
        for (std::size_t i = 0; i < link.clusters.size(); ++i) {
            const auto& cl = link.clusters[i];
            out << "cluster_" << i << " = " << cl.azimuth / kDegToRad << " "
                << cl.elevation / kDegToRad << " " << cl.power_fraction << " "
                << cl.delay_s * 1e9 << "\n";
        }
    }
    out << "[trajectory]\n"
        << "enabled = " << (trajectory_enabled ? "true" : "false") << "\n"
        << "delta_azimuth_deg = " << trajectory_delta_azimuth_deg << "\n"
        << "duration_subframes = " << trajectory_duration_subframes << "\n";
    out << "[tracker]\n"
        << "alpha0 = " << link.tracker.alpha0 << "\n"
        << "tau_alpha = " << link.tracker.tau_alpha << "\n"
        << "delta = " << link.tracker.delta << "\n"
        << "smoothing = " << link.tracker.smoothing << "\n";
    out << "[latency]\n"
        << "ideal = " << (latency_ideal ? "true" : "false") << "\n"
        << "tcpip_ms = " << latency.tcpip_ms << "\n"
        << "control_program_ms = " << latency.control_program_ms << "\n"
        << "ru_apply_ms = " << latency.ru_apply_ms << "\n"
        << "update_period_half_frames = " << latency.update_period_half_frames << "\n"
        << "abandoned_half_frames = " << latency.abandoned_half_frames << "\n";
    out << "[link]\n"
        << "modulation = " << modulation_name(link.modulation) << "\n"
        << "tx_power = " << link.tx_power << "\n"
        << "noise_power = " << link.noise_power << "\n"
        << "sync_plant_offset = " << link.sync_plant_offset << "\n"
        << "tracking_threshold_db = " << link.tracking_threshold_db << "\n";
    out << "[deployment]\n"
        << "bs_per_floor = "
        << (deployment.floor.floors > 0
                ? static_cast<int>(deployment.bs.size()) / deployment.floor.floors
                : 0)
        << "\n"
        << "floors = " << deployment.floor.floors << "\n"
        << "floor_x_m = " << deployment.floor.x_m << "\n"
        << "floor_y_m = " << deployment.floor.y_m << "\n"
        << "floor_height_m = " << deployment.floor.floor_height_m << "\n"
        << "ms_height_m = " << deployment.floor.ms_height_m << "\n"
        << "tx_power_dbm = " << deployment.tx_power_dbm << "\n"
        << "subarray_rows = " << deployment.subarray.rows << "\n"
        << "subarray_cols = " << deployment.subarray.cols << "\n"
        << "quantize = " << (deployment.quantize ? "true" : "false") << "\n";
    out << "[propagation]\n"
        << "exponent = " << propagation.pathloss_exponent << "\n"
        << "ref_loss_db = " << propagation.ref_loss_db << "\n"
        << "floor_penetration_db = " << propagation.floor_penetration_db << "\n"
        << "shadowing_sigma_db = " << propagation.shadowing_sigma_db << "\n"
        << "noise_figure_db = " << propagation.noise_figure_db << "\n"
        << "clusters_per_link = " << propagation.clusters_per_link << "\n"
        << "angle_spread_deg = " << propagation.angle_spread_rad / kDegToRad << "\n";
    out << "[output]\n"
        << "iq_dump = " << (iq_dump ? "true" : "false") << "\n";
    return out.str();
}

std::uint64_t ScenarioConfig::hash() const {
    const std::string text = serialize();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<PathCluster> ScenarioConfig::clusters_for_seed(std::uint64_t trial_seed) const {
    if (explicit_clusters) return link.clusters;
    Rng rng = Rng::derive(trial_seed, 0xC1);
    std::vector<PathCluster> clusters = make_rich_scattering_clusters(
        cluster_count, mean_azimuth_deg * kDegToRad, mean_elevation_deg * kDegToRad,
        angle_spread_deg * kDegToRad, delay_spread_ns * 1e-9, doppler_rate, rng);
    return clusters;
}

LinkScenario ScenarioConfig::resolved_link(std::uint64_t trial_seed) const {
    LinkScenario scenario = link;
    scenario.clusters = clusters_for_seed(trial_seed);
    if (trajectory_enabled) {
        TrajectorySpec traj;
        traj.start = scenario.clusters;
        traj.end = scenario.clusters;
        for (auto& cl : traj.end) cl.azimuth += trajectory_delta_azimuth_deg * kDegToRad;
        traj.duration_subframes = static_cast<int>(trajectory_duration_subframes);
        scenario.trajectory = traj;
    }
    return scenario;
}

} // namespace hbf
