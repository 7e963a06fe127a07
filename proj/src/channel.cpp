#include "hbf/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace hbf {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676656;

// Per-cluster fading coefficient at the given subframe. Unit variance:
// unit-modulus with an i.i.d. uniform initial phase, advanced by the
// deterministic Doppler rate. The optional Gauss-Markov innovation walks
// the phase with a seed-determined increment sequence; the coefficient is
// reconstructed from scratch so that (seed, subframe) fixes it exactly.
std::complex<double> fading_coeff(std::uint64_t seed, std::size_t cluster, int subframe,
                                  double doppler_rate, const FadingSpec& fading) {
    Rng rng = Rng::derive(seed, 0x1000 + cluster);
    double phase = rng.uniform(0.0, kTwoPi);
    phase += doppler_rate * subframe;
    if (fading.innovation_coherence < 1.0) {
        const double rho = std::clamp(fading.innovation_coherence, 0.0, 1.0);
        const double sigma = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        for (int t = 0; t < subframe; ++t) phase += sigma * rng.gaussian();
    }
    return std::polar(1.0, phase);
}
} // namespace

SpatialChannel generate_channel(const std::vector<PathCluster>& clusters,
                                const ArrayGeometry& geometry, const SubcarrierGrid& grid,
                                int subframe_index, std::uint64_t seed, const FadingSpec& fading) {
    if (clusters.empty()) throw std::invalid_argument("generate_channel: empty cluster list");
    const int n = geometry.size();
    const std::size_t k_count = grid.offsets_hz.size();
    CMat h = CMat::Zero(n, static_cast<Eigen::Index>(k_count));

    for (std::size_t l = 0; l < clusters.size(); ++l) {
        const auto& cl = clusters[l];
        const std::complex<double> g =
            fading_coeff(seed, l, subframe_index, cl.doppler_phase_rate, fading);
        const CVec a = std::sqrt(cl.power_fraction) * g * steering_vector(geometry, cl.azimuth, cl.elevation);
        for (std::size_t k = 0; k < k_count; ++k) {
            const std::complex<double> rot =
                std::polar(1.0, -kTwoPi * grid.offsets_hz[k] * cl.delay_s);
            h.col(static_cast<Eigen::Index>(k)) += a * rot;
        }
    }
    return {std::move(h), subframe_index};
}

CMat exact_correlation(const std::vector<PathCluster>& clusters, const ArrayGeometry& geometry) {
    if (clusters.empty()) throw std::invalid_argument("exact_correlation: empty cluster list");
    const int n = geometry.size();
    CMat r = CMat::Zero(n, n);
    for (const auto& cl : clusters) {
        const CVec a = steering_vector(geometry, cl.azimuth, cl.elevation);
        r += cl.power_fraction * (a * a.adjoint());
    }
    return r;
}

std::vector<PathCluster> evolve_trajectory(const TrajectorySpec& spec, int subframe_index) {
    if (spec.start.size() != spec.end.size())
        throw std::invalid_argument("evolve_trajectory: endpoint cluster counts differ");
    if (spec.duration_subframes <= 0 || subframe_index <= 0) return spec.start;
    if (subframe_index >= spec.duration_subframes) return spec.end;
    const double t = static_cast<double>(subframe_index) / spec.duration_subframes;
    std::vector<PathCluster> out(spec.start.size());
    for (std::size_t l = 0; l < out.size(); ++l) {
        const auto& a = spec.start[l];
        const auto& b = spec.end[l];
        out[l].azimuth = a.azimuth + t * (b.azimuth - a.azimuth);
        out[l].elevation = a.elevation + t * (b.elevation - a.elevation);
        out[l].power_fraction = a.power_fraction + t * (b.power_fraction - a.power_fraction);
        out[l].delay_s = a.delay_s + t * (b.delay_s - a.delay_s);
        out[l].doppler_phase_rate =
            a.doppler_phase_rate + t * (b.doppler_phase_rate - a.doppler_phase_rate);
    }
    return out;
}

void add_awgn(std::vector<std::complex<double>>& samples, double noise_power, Rng& rng) {
    if (noise_power < 0.0) throw std::invalid_argument("add_awgn: negative noise power");
    if (noise_power == 0.0) return;
    const double amp = std::sqrt(noise_power);
    for (auto& s : samples) s += amp * rng.cgaussian();
}

std::vector<PathCluster> make_rich_scattering_clusters(int count, double mean_azimuth,
                                                       double mean_elevation, double spread_rad,
                                                       double delay_spread_s,
                                                       double doppler_phase_rate, Rng& rng) {
    if (count < 1) throw std::invalid_argument("make_rich_scattering_clusters: count must be >= 1");
    std::vector<PathCluster> clusters(count);
    double total = 0.0;
    for (int l = 0; l < count; ++l) {
        auto laplacian = [&rng, spread_rad]() {
            const double u = rng.uniform() - 0.5;
            return -spread_rad * std::copysign(std::log(1.0 - 2.0 * std::abs(u)), u);
        };
        clusters[l].azimuth = mean_azimuth + laplacian();
        clusters[l].elevation = mean_elevation + 0.5 * laplacian();
        clusters[l].power_fraction = std::exp(-static_cast<double>(l)); // exponential profile
        clusters[l].delay_s = delay_spread_s * l / std::max(1, count - 1);
        // distinct per-cluster rates so time averaging kills cross terms
        clusters[l].doppler_phase_rate = doppler_phase_rate * (l + 1) / count;
        total += clusters[l].power_fraction;
    }
    for (auto& cl : clusters) cl.power_fraction /= total;
    return clusters;
}

} // namespace hbf
