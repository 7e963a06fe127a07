#ifndef HBF_FFT_HPP
#define HBF_FFT_HPP

#include <complex>
#include <vector>

namespace hbf {

using cplx = std::complex<double>;

/// In-place radix-2 FFT, unitary normalization (1/sqrt(n) both directions).
/// Size must be a power of two.
void fft(std::vector<cplx>& x, bool inverse);

/// Linear cross-correlation c[t] = sum_n x[n + t] * conj(r[n]), t in
/// [0, x.size() - 1], computed via zero-padded FFTs.
std::vector<cplx> cross_correlate(const std::vector<cplx>& x, const std::vector<cplx>& r);

/// FIR filtering, same-length output aligned to the input (no delay trim).
std::vector<cplx> fir_filter(const std::vector<cplx>& x, const std::vector<double>& taps);

} // namespace hbf

#endif
