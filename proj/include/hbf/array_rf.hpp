#ifndef HBF_ARRAY_RF_HPP
#define HBF_ARRAY_RF_HPP

#include <Eigen/Dense>
#include <complex>
#include <optional>

namespace hbf {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Planar antenna array on a regular grid, spacing in wavelengths.
struct ArrayGeometry {
    int rows = 6;
    int cols = 1;
    double spacing_wavelengths = 0.6;

    int size() const { return rows * cols; }
    void validate() const;
};

/// Quantizer specs of the phase-shifter / attenuator control board.
struct RfHardwareModel {
    int phase_bits = 4;
    int amplitude_bits = 6;
    double amplitude_step_db = 0.25;
    double update_delay_ms = 1.0;

    double phase_step_deg() const { return 360.0 / static_cast<double>(1 << phase_bits); }
    double amplitude_range_db() const {
        return static_cast<double>((1 << amplitude_bits) - 1) * amplitude_step_db;
    }
};

/// Analog element radiation pattern. Isotropic when exponent == 0;
/// otherwise cos^exponent(angle off boresight) with a front-to-back floor.
struct ElementPattern {
    double cosine_exponent = 0.0;
    double front_to_back_db = 30.0;

    bool isotropic() const { return cosine_exponent <= 0.0; }
    /// Power gain toward (azimuth, elevation) relative to boresight at
    /// (boresight_az, boresight_el). Peak gain normalized to 1.
    double power_gain(double azimuth, double elevation, double boresight_az = 0.0,
                      double boresight_el = 0.0) const;
};

struct QuantizeDiag {
    int zero_magnitude_count = 0;
};

/// Planar-array response toward (azimuth, elevation); element k carries
/// phase 2*pi*spacing*(row_k*u + col_k*v) with (u, v) the direction
/// cosines along the row and column axes. Unnormalized: norm = sqrt(N).
CVec steering_vector(const ArrayGeometry& geometry, double azimuth, double elevation);

/// Snap each coefficient to the nearest phase-shifter / attenuator level.
/// Attenuation is relative to the largest-magnitude coefficient, clamped
/// to the VGA range. The result is not renormalized.
CVec quantize_weight(const CVec& w, const RfHardwareModel& hw, QuantizeDiag* diag = nullptr);

/// Analog combining: conj(w) . h.
std::complex<double> apply_weight(const CVec& w, const CVec& h);

} // namespace hbf

#endif
