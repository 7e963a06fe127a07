#include "hbf/array_rf.hpp"

#include <cmath>
#include <stdexcept>

namespace hbf {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double deg2rad(double d) { return d * kPi / 180.0; }
} // namespace

void ArrayGeometry::validate() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("ArrayGeometry: rows and cols must be >= 1");
    if (!(spacing_wavelengths > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacing must be positive");
}

double ElementPattern::power_gain(double azimuth, double elevation, double boresight_az,
                                  double boresight_el) const {
    if (isotropic()) return 1.0;
    // angle between arrival direction and boresight, both unit vectors
    const double cx = std::cos(elevation) * std::cos(azimuth);
    const double cy = std::cos(elevation) * std::sin(azimuth);
    const double cz = std::sin(elevation);
    const double bx = std::cos(boresight_el) * std::cos(boresight_az);
    const double by = std::cos(boresight_el) * std::sin(boresight_az);
    const double bz = std::sin(boresight_el);
    const double c = cx * bx + cy * by + cz * bz;
    const double floor_gain = std::pow(10.0, -front_to_back_db / 10.0);
    if (c <= 0.0) return floor_gain;
    return std::max(std::pow(c, cosine_exponent), floor_gain);
}

CVec steering_vector(const ArrayGeometry& geometry, double azimuth, double elevation) {
    geometry.validate();
    // rows lie along the elevation axis, cols in the azimuth plane
    const double u = std::sin(elevation);
    const double v = std::cos(elevation) * std::sin(azimuth);
    const int n = geometry.size();
    CVec a(n);
    for (int k = 0; k < n; ++k) {
        const int row = k / geometry.cols;
        const int col = k % geometry.cols;
        const double phase = kTwoPi * geometry.spacing_wavelengths * (row * u + col * v);
        a(k) = std::polar(1.0, phase);
    }
    return a;
}

CVec quantize_weight(const CVec& w, const RfHardwareModel& hw, QuantizeDiag* diag) {
    const double phase_step = deg2rad(hw.phase_step_deg());
    const double att_step = hw.amplitude_step_db;
    const double att_max = hw.amplitude_range_db();
    const double ref_mag = w.cwiseAbs().maxCoeff();
    if (ref_mag <= 0.0) throw std::invalid_argument("quantize_weight: all-zero weight");

    CVec q(w.size());
    for (int k = 0; k < w.size(); ++k) {
        const double mag = std::abs(w(k));
        double att_db;
        if (mag < ref_mag * 1e-15) {
            att_db = att_max; // deepest VGA level
            if (diag) ++diag->zero_magnitude_count;
        } else {
            att_db = 20.0 * std::log10(ref_mag / mag);
            att_db = std::floor(att_db / att_step + 0.5) * att_step;
            att_db = std::clamp(att_db, 0.0, att_max);
        }
        // ties round toward the higher phase level
        const double phase = std::arg(w(k));
        const double phase_q = std::floor(phase / phase_step + 0.5) * phase_step;
        q(k) = std::polar(ref_mag * std::pow(10.0, -att_db / 20.0), phase_q);
    }
    return q;
}

std::complex<double> apply_weight(const CVec& w, const CVec& h) {
    if (w.size() != h.size())
        throw std::invalid_argument("apply_weight: weight/channel length mismatch");
    return w.dot(h); // Eigen conjugates the left operand
}

} // namespace hbf
