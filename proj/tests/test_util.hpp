#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracdiv/divisibility.hpp"
#include "fracdiv/harmonics.hpp"

namespace testutil {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1 - z * z) * dp * dp);
  }
  return {x, w};
}

// int_{-1}^{1} h(t) rho(t) dt evaluated as sigma_{d-1} int_0^pi h(cos a) sin^{d-2}(a) da.
inline double integrate_against_rho(int d, const std::function<double(double)>& h, int nodes = 2048) {
  static thread_local std::pair<std::vector<double>, std::vector<double>> cache;
  if (cache.first.size() != static_cast<std::size_t>(nodes)) cache = gauss_legendre(nodes);
  const double half = 0.5 * std::numbers::pi;
  const double sigma_dm1 = 2.0 * std::pow(std::numbers::pi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1));
  double sum = 0;
  for (std::size_t i = 0; i < cache.first.size(); ++i) {
    const double a = half * (cache.first[i] + 1.0);
    sum += cache.second[i] * h(std::cos(a)) * std::pow(std::sin(a), d - 2);
  }
  return sigma_dm1 * half * sum;
}

struct MonteCarlo {
  double mean = 0;
  double std_error = 0;
};

// Funk-Hecke check: <P_n^u, P_n^v> = sigma_d * E[P_n(u.x) P_n(v.x)] for uniform x.
inline MonteCarlo mc_zonal_inner_product(int d, int n, const Eigen::VectorXd& u, const Eigen::VectorXd& v, int samples,
                                         fracdiv::Rng& rng) {
  const fracdiv::GegenbauerTable table(d, n);
  double mean = 0, m2 = 0;
  for (int k = 1; k <= samples; ++k) {
    const Eigen::VectorXd x = rng.sphere_point(d);
    const double val = table.eval_unchecked(n, std::clamp(u.dot(x), -1.0, 1.0)) *
                       table.eval_unchecked(n, std::clamp(v.dot(x), -1.0, 1.0));
    const double delta = val - mean;
    mean += delta / k;
    m2 += delta * (val - mean);
  }
  const double sigma = fracdiv::sphere_area(d);
  return {sigma * mean, sigma * std::sqrt(m2 / (samples - 1) / samples)};
}

// Matrix of (1/sigma_d) <P_n^{v_i}, sum_s gamma_s.P_n^{v_j}> built from the
// Funk-Hecke formula and the pole identity gamma.P_n^v = P_n^{gamma v}.
inline Eigen::MatrixXd adjoint_route_L(const fracdiv::ZonalBasis& basis, const fracdiv::RotationTuple& tuple) {
  const int N = basis.size();
  const double sigma = fracdiv::sphere_area(basis.d());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (const auto& g : tuple) {
        Eigen::VectorXd moved = g.apply(basis.points().col(j));
        moved.normalize();
        l(i, j) += fracdiv::zonal_inner_product(basis.d(), basis.n(), basis.points().col(i), moved) / sigma;
      }
  return l;
}

}  // namespace testutil
