#ifndef AIGRAV_FFT_HPP
#define AIGRAV_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace aigrav::fft {

using Complex = std::complex<double>;

// Unnormalised forward transform of a real sequence; full-length spectrum.
std::vector<Complex> forward(const std::vector<double>& x);
std::vector<Complex> forward(const std::vector<Complex>& x);

// Inverse transform including the 1/N factor.
std::vector<Complex> inverse(const std::vector<Complex>& spectrum);

// Smallest n' >= n whose prime factors are all in {2, 3, 5}.
std::size_t next_smooth(std::size_t n);
bool is_smooth(std::size_t n);

}  // namespace aigrav::fft

#endif  // AIGRAV_FFT_HPP
