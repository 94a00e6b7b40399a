#pragma once

// Seeded pseudorandom source.
//
// The integer stream is std::mt19937_64, whose output sequence is fixed by
// the C++ standard.  Reals are derived by hand rather than through the
// <random> distributions, whose algorithms are implementation-defined:
//   uniform()  = (next() >> 11) * 2^-53, in [0, 1)
//   normal()   = Marsaglia polar method on 2*uniform()-1 pairs, caching the
//                second variate
// Independent streams are obtained with derive_seed(seed, k), a SplitMix64
// mix of the parent seed and the stream index.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace fracdiv {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  Eigen::MatrixXd gaussian_matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  // Uniform point on S^{d-1}: normalized standard Gaussian vector.
  Eigen::VectorXd sphere_point(int d) {
    Eigen::VectorXd x(d);
    double norm = 0.0;
    do {
      for (int i = 0; i < d; ++i) x[i] = normal();
      norm = x.norm();
    } while (norm < 1e-300);
    return x / norm;
  }

  Rng split(std::uint64_t stream) { return Rng(derive_seed(next(), stream)); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fracdiv
