#include "aigrav/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace aigrav::fft {

std::vector<Complex> forward(const std::vector<double>& x) {
  Eigen::FFT<double> engine;
  std::vector<Complex> out;
  engine.fwd(out, x);  // fills the full spectrum unless HalfSpectrum is set
  return out;
}

std::vector<Complex> forward(const std::vector<Complex>& x) {
  Eigen::FFT<double> engine;
  std::vector<Complex> out;
  engine.fwd(out, x);
  return out;
}

std::vector<Complex> inverse(const std::vector<Complex>& spectrum) {
  Eigen::FFT<double> engine;
  std::vector<Complex> out;
  engine.inv(out, spectrum);
  return out;
}

bool is_smooth(std::size_t n) {
  if (n == 0) return false;
  for (std::size_t p : {2u, 3u, 5u})
    while (n % p == 0) n /= p;
  return n == 1;
}

std::size_t next_smooth(std::size_t n) {
  if (n <= 1) return 1;
  while (!is_smooth(n)) ++n;
  return n;
}

}  // namespace aigrav::fft
