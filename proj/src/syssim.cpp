#include "hbf/syssim.hpp"

#include "hbf/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace hbf {

namespace {
constexpr double kPi = 3.14159265358979323846;

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double ms_z(const FloorGeometry& f, int floor) { return floor * f.floor_height_m + f.ms_height_m; }
double bs_z(const FloorGeometry& f, int floor) { return (floor + 1) * f.floor_height_m; }

double link_distance(const MsPosition& ms, const BaseStation& bs, const FloorGeometry& f) {
    const double dx = ms.x_m - bs.x_m;
    const double dy = ms.y_m - bs.y_m;
    const double dz = ms.z_m - bs_z(f, bs.floor);
    return std::max(1.0, std::sqrt(dx * dx + dy * dy + dz * dz));
}
} // namespace

void Deployment::validate() const {
    if (bs.empty()) throw std::invalid_argument("Deployment: need at least one BS");
    if (rf_chains != 2) throw std::invalid_argument("Deployment: evaluator models 2 RF chains");
    subarray.validate();
}

double PropagationModel::pathloss_db(double distance_m, int floors_crossed) const {
    return ref_loss_db + 10.0 * pathloss_exponent * std::log10(std::max(1.0, distance_m)) +
           floor_penetration_db * std::abs(floors_crossed);
}

double PropagationModel::noise_power_dbm() const {
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

std::string variant_name(SystemVariant v) {
    switch (v) {
        case SystemVariant::ConventionalIci: return "conventional";
        case SystemVariant::ConventionalNoIci: return "conventional_no_ici";
        case SystemVariant::HybridIci: return "hybrid";
        case SystemVariant::HybridNoIci: return "hybrid_no_ici";
    }
    return "unknown";
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        cdf.emplace_back(samples[i], static_cast<double>(i + 1) / samples.size());
    return cdf;
}

std::vector<MsPosition> drop_users(const Deployment& deployment, int count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("drop_users: count must be >= 1");
    const FloorGeometry& f = deployment.floor;
    std::vector<MsPosition> out(static_cast<std::size_t>(count));
    for (auto& ms : out) {
        ms.x_m = rng.uniform(0.0, f.x_m);
        ms.y_m = rng.uniform(0.0, f.y_m);
        ms.floor = static_cast<int>(rng.uniform() * f.floors);
        ms.floor = std::min(ms.floor, f.floors - 1);
        ms.z_m = ms_z(f, ms.floor);
    }
    return out;
}

int associate(const MsPosition& ms, const Deployment& deployment, const PropagationModel& prop,
              const std::vector<double>& shadowing_db) {
    int best = 0;
    double best_rx = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < deployment.bs.size(); ++b) {
        const double d = link_distance(ms, deployment.bs[b], deployment.floor);
        const int fc = std::abs(ms.floor - deployment.bs[b].floor);
        const double rx = deployment.tx_power_dbm - prop.pathloss_db(d, fc) + shadowing_db[b];
        if (rx > best_rx + 1e-12) { // ties to the lowest id
            best_rx = rx;
            best = static_cast<int>(b);
        }
    }
    return best;
}

LinkFading draw_link_fading(const PropagationModel& prop, const Deployment& deployment, Rng& rng) {
    LinkFading link;
    const int chains = deployment.rf_chains;
    link.clusters.resize(static_cast<std::size_t>(prop.clusters_per_link));
    const double mean_az = rng.uniform(-kPi, kPi);
    const double mean_el = rng.uniform(-0.3, 0.3);
    double total = 0.0;
    for (int l = 0; l < prop.clusters_per_link; ++l) {
        auto laplacian = [&rng, &prop]() {
            const double u = rng.uniform() - 0.5;
            return -prop.angle_spread_rad * std::copysign(std::log(1.0 - 2.0 * std::abs(u)), u);
        };
        auto& cl = link.clusters[static_cast<std::size_t>(l)];
        cl.azimuth = mean_az + laplacian();
        cl.elevation = mean_el + 0.5 * laplacian();
        cl.power_fraction = std::exp(-static_cast<double>(l));
        total += cl.power_fraction;
    }
    for (auto& cl : link.clusters) cl.power_fraction /= total;

    link.coeffs = CMat(prop.clusters_per_link, chains * chains);
    for (int l = 0; l < prop.clusters_per_link; ++l)
        for (int c = 0; c < chains * chains; ++c) link.coeffs(l, c) = rng.cgaussian();
    return link;
}

namespace {
std::vector<PathCluster> element_weighted(const LinkFading& link, const Deployment& deployment) {
    std::vector<PathCluster> cl = link.clusters;
    if (!deployment.element.isotropic())
        for (auto& c : cl) c.power_fraction *= deployment.element.power_gain(c.azimuth, c.elevation);
    return cl;
}
} // namespace

CVec saturated_weight(const LinkFading& link, const Deployment& deployment) {
    const CMat r = exact_correlation(element_weighted(link, deployment), deployment.subarray);
    CVec w = eigen_oracle(r).vector;
    if (deployment.quantize) {
        w = quantize_weight(w, deployment.hardware);
        w.normalize(); // the BS drives the PA at constant total power
    }
    return w;
}

CMat beamform_downlink(const LinkFading& link, const Deployment& deployment, bool hybrid,
                       const CVec& subarray_weight) {
    const int chains = deployment.rf_chains;
    CMat h = CMat::Zero(chains, chains); // (rx chain, tx chain)
    for (std::size_t l = 0; l < link.clusters.size(); ++l) {
        const auto& cl = link.clusters[l];
        cplx array_term(1.0, 0.0);
        if (hybrid) {
            const CVec a = steering_vector(deployment.subarray, cl.azimuth, cl.elevation);
            array_term = apply_weight(subarray_weight, a);
        }
        const double amp = std::sqrt(
            cl.power_fraction *
            (deployment.element.isotropic() ? 1.0
                                            : deployment.element.power_gain(cl.azimuth, cl.elevation)));
        for (int m = 0; m < chains; ++m)
            for (int r = 0; r < chains; ++r)
                h(r, m) += amp * array_term * link.coeffs(static_cast<Eigen::Index>(l), m * chains + r);
    }
    return h;
}

double compute_rate(const CMat& h, const CMat& interference_cov, double noise_power_w,
                    double tx_power_w, double bandwidth_hz, double max_rate_bps,
                    bool* regularized) {
    const int n = static_cast<int>(h.rows());
    CMat q = interference_cov + noise_power_w * CMat::Identity(n, n);
    Eigen::FullPivLU<CMat> lu(q);
    if (!lu.isInvertible()) {
        q += noise_power_w * CMat::Identity(n, n);
        lu.compute(q);
        if (regularized) *regularized = true;
    }
    const double p_stream = tx_power_w / n;
    const CMat m = CMat::Identity(n, n) + p_stream * h.adjoint() * lu.solve(h);
    const double logdet = std::log2(std::max(1.0, std::abs(m.determinant())));
    return std::min(max_rate_bps, bandwidth_hz * logdet);
}

Deployment default_deployment() {
    Deployment d;
    for (int floor = 0; floor < 2; ++floor) {
        d.bs.push_back({10.0, 7.5, floor});
        d.bs.push_back({40.0, 7.5, floor});
        d.bs.push_back({25.0, 15.0, floor});
        d.bs.push_back({10.0, 22.5, floor});
        d.bs.push_back({40.0, 22.5, floor});
    }
    return d;
}

namespace {

struct DropOutput {
    std::array<std::vector<double>, kVariantCount> rates;
    long regularized = 0;
};

DropOutput run_one_drop(const Deployment& deployment, const PropagationModel& prop,
                        int ms_per_floor, std::uint64_t drop_seed) {
    DropOutput out;
    Rng rng(drop_seed);
    const int n_bs = static_cast<int>(deployment.bs.size());
    const int n_ms = ms_per_floor * deployment.floor.floors;
    const std::vector<MsPosition> users = drop_users(deployment, n_ms, rng);

    // log-normal shadowing per (ms, bs) pair
    std::vector<std::vector<double>> shadowing(static_cast<std::size_t>(n_ms));
    for (auto& row : shadowing) {
        row.resize(static_cast<std::size_t>(n_bs));
        for (auto& v : row) v = prop.shadowing_sigma_db * rng.gaussian();
    }

    std::vector<int> serving(static_cast<std::size_t>(n_ms));
    std::vector<std::vector<int>> cell_users(static_cast<std::size_t>(n_bs));
    for (int u = 0; u < n_ms; ++u) {
        serving[u] = associate(users[u], deployment, prop, shadowing[u]);
        cell_users[serving[u]].push_back(u);
    }

    // each cell schedules one random MS in its coverage
    std::vector<int> scheduled(static_cast<std::size_t>(n_bs), -1);
    for (int b = 0; b < n_bs; ++b) {
        if (cell_users[b].empty()) continue;
        const std::size_t pick = static_cast<std::size_t>(rng.uniform() * cell_users[b].size());
        scheduled[b] = cell_users[b][std::min(pick, cell_users[b].size() - 1)];
    }

    // per (bs, scheduled ms) fading for every BS->victim pair, drawn once so
    // all four variants consume identical randomness
    std::vector<std::vector<LinkFading>> fading(static_cast<std::size_t>(n_bs));
    for (int b = 0; b < n_bs; ++b) {
        fading[b].resize(static_cast<std::size_t>(n_bs));
        for (int v = 0; v < n_bs; ++v) {
            if (scheduled[v] < 0) continue;
            fading[b][v] = draw_link_fading(prop, deployment, rng);
        }
    }

    // saturated weight of each BS toward its own scheduled user
    std::vector<CVec> weights(static_cast<std::size_t>(n_bs));
    for (int b = 0; b < n_bs; ++b) {
        if (scheduled[b] < 0) continue;
        weights[b] = saturated_weight(fading[b][b], deployment);
    }

    const double noise_w = dbm_to_watt(prop.noise_power_dbm());
    const double tx_w = dbm_to_watt(deployment.tx_power_dbm);

    for (int v = 0; v < n_bs; ++v) {
        const int user = scheduled[v];
        if (user < 0) continue;
        const auto& ms = users[user];

        auto link_gain = [&](int b) {
            const double d = link_distance(ms, deployment.bs[b], deployment.floor);
            const int fc = std::abs(ms.floor - deployment.bs[b].floor);
            const double pl_db = prop.pathloss_db(d, fc) - shadowing[user][b];
            return std::pow(10.0, -pl_db / 10.0);
        };

        for (const bool hybrid : {false, true}) {
            CMat h_serv = beamform_downlink(fading[v][v], deployment, hybrid, weights[v]);
            h_serv *= std::sqrt(link_gain(v));

            CMat ici = CMat::Zero(deployment.rf_chains, deployment.rf_chains);
            for (int b = 0; b < n_bs; ++b) {
                if (b == v || scheduled[b] < 0) continue;
                CMat h_int = beamform_downlink(fading[b][v], deployment, hybrid, weights[b]);
                h_int *= std::sqrt(link_gain(b));
                ici += (tx_w / deployment.rf_chains) * (h_int * h_int.adjoint());
            }

            bool reg = false;
            const double rate_ici = compute_rate(h_serv, ici, noise_w, tx_w, prop.bandwidth_hz,
                                                 prop.max_rate_bps, &reg);
            const double rate_clean =
                compute_rate(h_serv, CMat::Zero(deployment.rf_chains, deployment.rf_chains),
                             noise_w, tx_w, prop.bandwidth_hz, prop.max_rate_bps, &reg);
            if (reg) ++out.regularized;
            const int base = hybrid ? static_cast<int>(SystemVariant::HybridIci)
                                    : static_cast<int>(SystemVariant::ConventionalIci);
            out.rates[static_cast<std::size_t>(base)].push_back(rate_ici);
            out.rates[static_cast<std::size_t>(base) + 1].push_back(rate_clean);
        }
    }
    return out;
}

} // namespace

SystemResult run_system_eval(const Deployment& deployment, const PropagationModel& prop,
                             int drops, int ms_per_floor, std::uint64_t seed, int workers) {
    deployment.validate();
    if (drops < 1) throw std::invalid_argument("run_system_eval: drops must be >= 1");
    workers = std::max(1, workers);

    std::vector<DropOutput> partial(static_cast<std::size_t>(workers));
    auto worker_fn = [&](int w) {
        for (int d = w; d < drops; d += workers) {
            std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ULL * (d + 1));
            DropOutput one = run_one_drop(deployment, prop, ms_per_floor, splitmix64(state));
            for (int i = 0; i < kVariantCount; ++i) {
                auto& dst = partial[static_cast<std::size_t>(w)].rates[static_cast<std::size_t>(i)];
                auto& src = one.rates[static_cast<std::size_t>(i)];
                dst.insert(dst.end(), src.begin(), src.end());
            }
            partial[static_cast<std::size_t>(w)].regularized += one.regularized;
        }
    };
    if (workers == 1) {
        worker_fn(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
        for (auto& t : pool) t.join();
    }

    SystemResult result;
    for (int i = 0; i < kVariantCount; ++i) {
        auto& all = result.rates[static_cast<std::size_t>(i)];
        for (auto& p : partial) {
            auto& src = p.rates[static_cast<std::size_t>(i)];
            all.insert(all.end(), src.begin(), src.end());
        }
        std::sort(all.begin(), all.end()); // order-independent merge
        result.mean_rate_bps[static_cast<std::size_t>(i)] =
            all.empty() ? 0.0 : std::accumulate(all.begin(), all.end(), 0.0) / all.size();
    }
    for (auto& p : partial) result.regularized_count += p.regularized;
    return result;
}

} // namespace hbf
