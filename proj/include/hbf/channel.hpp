#ifndef HBF_CHANNEL_HPP
#define HBF_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include "hbf/array_rf.hpp"
#include "hbf/rng.hpp"

namespace hbf {

/// One multipath cluster of the geometric channel model.
struct PathCluster {
    double azimuth = 0.0;              // radians
    double elevation = 0.0;            // radians
    double power_fraction = 1.0;       // fractions sum to 1 over the set
    double delay_s = 0.0;              // < CP duration
    double doppler_phase_rate = 0.0;   // radians per subframe
};

/// Per-subcarrier element-domain channel for one subframe.
struct SpatialChannel {
    CMat h;             // N x K, column k = h(k) over antenna elements
    int subframe_index = 0;
};

/// Grid the channel is evaluated on: K active subcarriers at frequencies
/// offset_hz(k) relative to the carrier.
struct SubcarrierGrid {
    std::vector<double> offsets_hz;
};

/// Linear A->B motion of the cluster set, parameters interpolated per
/// subframe; endpoints held outside [0, duration].
struct TrajectorySpec {
    std::vector<PathCluster> start;
    std::vector<PathCluster> end;
    int duration_subframes = 0;
};

/// Stateless per-cluster fading: unit-modulus coefficient whose phase is
/// seed-determined and advances by doppler_phase_rate each subframe.
/// With innovation_coherence < 1 a Gauss-Markov innovation is mixed in,
/// still fully determined by (seed, subframe).
struct FadingSpec {
    double innovation_coherence = 1.0; // 1 = deterministic Doppler only
};

SpatialChannel generate_channel(const std::vector<PathCluster>& clusters,
                                const ArrayGeometry& geometry, const SubcarrierGrid& grid,
                                int subframe_index, std::uint64_t seed,
                                const FadingSpec& fading = {});

/// Exact spatial correlation R = sum_l p_l a_l a_l^H (expectation over the
/// independent unit-variance cluster fading taken analytically).
CMat exact_correlation(const std::vector<PathCluster>& clusters, const ArrayGeometry& geometry);

std::vector<PathCluster> evolve_trajectory(const TrajectorySpec& spec, int subframe_index);

/// Adds i.i.d. circular complex Gaussian noise of the given power in place.
void add_awgn(std::vector<std::complex<double>>& samples, double noise_power, Rng& rng);

/// Default rich-scattering cluster set: Laplacian-spread offsets around a
/// mean direction with an exponential power profile.
std::vector<PathCluster> make_rich_scattering_clusters(int count, double mean_azimuth,
                                                       double mean_elevation, double spread_rad,
                                                       double delay_spread_s,
                                                       double doppler_phase_rate, Rng& rng);

} // namespace hbf

#endif
