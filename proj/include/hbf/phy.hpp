#ifndef HBF_PHY_HPP
#define HBF_PHY_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbf/array_rf.hpp"
#include "hbf/channel.hpp"
#include "hbf/fft.hpp"
#include "hbf/rng.hpp"

namespace hbf {

struct FramingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// LTE-style numerology: 20 MHz, extended CP, 6 symbols per slot.
struct Numerology {
    double sample_rate_hz = 30.72e6;
    int fft_size = 2048;
    double subcarrier_spacing_hz = 15e3;
    int cp_samples = 512;
    int symbols_per_slot = 6;
    int slots_per_frame = 20;
    int active_subcarriers = 1200;

    int samples_per_symbol() const { return fft_size + cp_samples; }
    int symbols_per_subframe() const { return 2 * symbols_per_slot; }
    int samples_per_subframe() const { return samples_per_symbol() * symbols_per_subframe(); }
    int subframes_per_frame() const { return slots_per_frame / 2; }

    /// Signed tone index of active subcarrier a (DC skipped).
    int tone_index(int a) const { return a < active_subcarriers / 2 ? a - active_subcarriers / 2 : a - active_subcarriers / 2 + 1; }
    /// FFT bin of active subcarrier a.
    int fft_bin(int a) const { return (tone_index(a) + fft_size) % fft_size; }
    /// Frequency offsets of the active subcarriers, for channel evaluation.
    SubcarrierGrid active_grid() const;

    void validate() const;
};

enum class Modulation : int { Qpsk = 2, Qam16 = 4, Qam64 = 6 };
inline int bits_per_symbol(Modulation m) { return static_cast<int>(m); }

enum class ReRole : std::uint8_t { Data = 0, Rs = 1, Pss = 2, Null = 3 };

/// One subframe of frequency-domain symbols plus per-RE role labels.
struct ResourceGrid {
    CMat re;                                                   // active_sc x symbols
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> roles;

    ReRole role(int sc, int sym) const { return static_cast<ReRole>(roles(sc, sym)); }
};

/// Frequency-domain Zadoff-Chu sequence x(n) = exp(-j*pi*root*n*(n+1)/len).
CVec zadoff_chu(int root, int length = 63);

constexpr int kDefaultZcRoot = 25;

/// True when the subframe carries a PSS (first and eleventh slot of the frame).
inline bool subframe_has_pss(int subframe_in_frame) {
    return subframe_in_frame == 0 || subframe_in_frame == 5;
}

/// Known QPSK reference-signal value for (slot, symbol-in-slot, subcarrier).
cplx rs_value(int slot_global, int sym_in_slot, int subcarrier);

/// Role layout of a subframe (RS lattice, PSS placement, DC handling).
ResourceGrid reference_grid(const Numerology& num, int subframe_in_frame, int slot0_global = 0);

int data_capacity_bits(const Numerology& num, Modulation mod, int subframe_in_frame);

/// Fills the data REs of a reference grid with Gray-mapped QAM symbols.
ResourceGrid make_subframe_grid(const Numerology& num, Modulation mod, int subframe_in_frame,
                                const std::vector<std::uint8_t>& bits, int slot0_global = 0);

/// IFFT + CP per symbol, unitary FFT scaling.
std::vector<cplx> ofdm_modulate(const Numerology& num, const ResourceGrid& grid);

/// CP removal + FFT; role labels restored from the reference layout.
ResourceGrid ofdm_demodulate(const Numerology& num, const std::vector<cplx>& samples,
                             int subframe_in_frame, int slot0_global = 0);

struct FilterSpec {
    double cutoff_hz = 1.4e6;
    double stopband_edge_hz = 2.0e6;
    double stopband_attenuation_db = 50.0;
    double passband_ripple_db = 0.1;
    int max_taps = 257;
};

/// Kaiser-window linear-phase FIR meeting the mask; throws DesignError with
/// the realized margins when the tap budget is insufficient.
std::vector<double> design_lpf(const FilterSpec& spec, double sample_rate_hz);

/// Time-domain PSS replica: the PSS symbol without CP.
std::vector<cplx> pss_time_replica(const Numerology& num, int root = kDefaultZcRoot);

struct SyncResult {
    bool ok = false;
    long offset = 0;
    double peak_ratio = 0.0; // main peak over the rms sidelobe level
};

/// LPF + PSS cross-correlation timing search. Both the samples and the
/// replica pass through the same filter, so group delays cancel and the
/// reported offset points at the first sample of the PSS symbol. Ties go
/// to the earliest offset.
SyncResult synchronize(const std::vector<cplx>& samples, const std::vector<cplx>& pss_replica,
                       const std::vector<double>& lpf_taps, double peak_ratio_threshold = 3.0);

/// Reusable PSS timing search. Mathematically the same statistic as
/// synchronize(): correlating the filtered samples with the filtered
/// replica equals correlating the raw samples with the replica convolved
/// with the filter autocorrelation, so the filter is folded into one
/// kernel. A decimated coarse pass bounds the search and an exact
/// full-rate pass around the coarse peak picks the offset.
class PssCorrelator {
  public:
    PssCorrelator(const Numerology& num, const std::vector<double>& lpf_taps,
                  int root = kDefaultZcRoot, int decimation = 4);

    SyncResult locate(const std::vector<cplx>& samples, double peak_ratio_threshold = 3.0) const;

  private:
    std::vector<cplx> kernel_;      // replica * (taps correlated with taps)
    std::vector<cplx> kernel_dec_;  // decimated kernel for the coarse pass
    int decimation_;
    long group_delay_ = 0;
    long cp_guard_ = 0; // sidelobe exclusion half-width (one cyclic prefix)
};

/// LS at RS REs, linear interpolation across subcarriers, nearest-hold at
/// the band edges and between RS-bearing symbols.
CMat estimate_channel(const Numerology& num, const ResourceGrid& rx, const ResourceGrid& ref);

struct EqualizeResult {
    CMat symbols;                   // equalized data REs (non-data REs zero)
    std::vector<std::uint8_t> bits; // hard decisions, Gray demapped
    double evm_db = 0.0;            // vs nearest constellation point
    int erased = 0;                 // REs with |h| below the inversion floor
};

EqualizeResult equalize_zf(const Numerology& num, const ResourceGrid& rx, const CMat& estimates,
                           Modulation mod);

struct SnrResult {
    double snr_db = 0.0;
    bool saturated = false; // noise estimate hit zero; snr_db is a cap
    double signal_power = 0.0;
    double noise_power = 0.0;
};

/// RS-residual SNR: signal from the time-smoothed per-RS LS estimates,
/// noise from the residual spread across RS-bearing symbols.
SnrResult measure_snr(const Numerology& num, const ResourceGrid& rx, const ResourceGrid& ref);

// QAM helpers (unit average power, Gray mapping)
cplx qam_modulate(const std::uint8_t* bits, Modulation mod);
void qam_demodulate(cplx x, Modulation mod, std::uint8_t* bits_out);
cplx qam_nearest(cplx x, Modulation mod);

/// IQ dump: interleaved little-endian float32 (I, Q) pairs plus a one-line
/// sidecar (.txt) describing the format and sample rate.
void write_iq_file(const std::string& path, const std::vector<cplx>& samples,
                   double sample_rate_hz);

} // namespace hbf

#endif
