#pragma once

// Gegenbauer polynomials, spherical-harmonic dimensions, zonal harmonics and
// the sphere measure constants.
//
// P_n denotes the degree-n Gegenbauer polynomial for S^{d-1}, orthogonal on
// [-1,1] under rho(t) = sigma_{d-1} (1-t^2)^{(d-3)/2} and normalized so that
// P_n(1) = 1.  For d = 3 these are the Legendre polynomials; for d = 2 the
// Chebyshev polynomials of the first kind.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracdiv/errors.hpp"

namespace fracdiv {

inline constexpr double kUnitTolerance = 1e-9;
inline constexpr double kArgumentSlack = 1e-12;

namespace detail {

inline void require_dimension(int d, const char* op) {
  if (d < 2)
    throw DomainError(std::string(op) + ": ambient dimension d must be >= 2, got " +
                      std::to_string(d));
}

// sigma_k for any k >= 1 (sigma_1 = 2 counts the two points of S^0).
inline double sphere_measure(int k) {
  const double half = 0.5 * k;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

// Exact binomial coefficient; throws when the result leaves int64 range.
inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (acc > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max()))
      throw DomainError("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                        ") overflows 64-bit range");
  }
  return static_cast<std::int64_t>(acc);
}

}  // namespace detail

/// Dimension N_n of the space H_n of degree-n spherical harmonics on S^{d-1}.
inline std::int64_t dim_harmonic(int d, int n) {
  detail::require_dimension(d, "dim_harmonic");
  if (n < 0) throw DomainError("dim_harmonic: degree n must be >= 0, got " + std::to_string(n));
  const std::int64_t lead = detail::binomial(d + n - 1, n);
  const std::int64_t tail = n >= 2 ? detail::binomial(d + n - 3, n - 2) : 0;
  return lead - tail;
}

/// Total measure sigma_d = 2 pi^{d/2} / Gamma(d/2) of S^{d-1}.
inline double sphere_area(int d) {
  detail::require_dimension(d, "sphere_area");
  return detail::sphere_measure(d);
}

/// Density of the push-forward of the spherical measure onto a coordinate axis.
inline double density_rho(int d, double t) {
  detail::require_dimension(d, "density_rho");
  if (!(std::abs(t) < 1.0)) return 0.0;
  return detail::sphere_measure(d - 1) * std::pow(1.0 - t * t, 0.5 * (d - 3));
}

class SphereConstants {
 public:
  explicit SphereConstants(int d) : d_(d) {
    detail::require_dimension(d, "SphereConstants");
    sigma_d_ = detail::sphere_measure(d);
    sigma_dm1_ = detail::sphere_measure(d - 1);
  }

  int d() const { return d_; }
  double sigma_d() const { return sigma_d_; }
  double rho(double t) const {
    if (!(std::abs(t) < 1.0)) return 0.0;
    return sigma_dm1_ * std::pow(1.0 - t * t, 0.5 * (d_ - 3));
  }

 private:
  int d_;
  double sigma_d_;
  double sigma_dm1_;
};

// Normalized three-term recurrence P_{n+1}(t) = a_n t P_n(t) - b_n P_{n-1}(t),
// coefficients precomputed up to n_max.  For d >= 3 (lambda = (d-2)/2 > 0):
//   a_n = (2n + d - 2) / (n + d - 2),  b_n = n / (n + d - 2).
// For d = 2 the lambda -> 0 limit is the Chebyshev recurrence with P_1 = t.
class GegenbauerTable {
 public:
  GegenbauerTable(int d, int n_max) : d_(d), n_max_(n_max) {
    detail::require_dimension(d, "GegenbauerTable");
    if (n_max < 0) throw DomainError("GegenbauerTable: n_max must be >= 0");
    a_.resize(static_cast<std::size_t>(n_max));
    b_.resize(static_cast<std::size_t>(n_max));
    for (int n = 0; n < n_max; ++n) {
      if (d == 2) {
        a_[n] = n == 0 ? 1.0 : 2.0;
        b_[n] = n == 0 ? 0.0 : 1.0;
      } else {
        const double denom = n + d - 2.0;
        a_[n] = (2.0 * n + d - 2.0) / denom;
        b_[n] = n / denom;
      }
    }
  }

  int d() const { return d_; }
  int n_max() const { return n_max_; }

  double operator()(int n, double t) const { return eval(n, t); }

  double eval(int n, double t) const {
    if (n < 0 || n > n_max_)
      throw DomainError("gegenbauer_eval: degree " + std::to_string(n) + " outside table range [0, " +
                        std::to_string(n_max_) + "]");
    return eval_unchecked(n, clamp_argument(t));
  }

  // Argument is assumed to lie in [-1, 1].
  double eval_unchecked(int n, double t) const {
    if (n == 0) return 1.0;
    double prev = 1.0, cur = t;
    for (int k = 1; k < n; ++k) {
      const double next = a_[k] * t * cur - b_[k] * prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }

  static double clamp_argument(double t, double slack = kArgumentSlack) {
    if (std::isnan(t) || std::abs(t) > 1.0 + slack)
      throw DomainError("gegenbauer_eval: argument " + std::to_string(t) + " outside [-1, 1]");
    return std::clamp(t, -1.0, 1.0);
  }

 private:
  int d_;
  int n_max_;
  std::vector<double> a_;
  std::vector<double> b_;
};

inline double gegenbauer_eval(const GegenbauerTable& table, int n, double t) { return table.eval(n, t); }

/// Returns v renormalized to unit length; rejects vectors further than
/// kUnitTolerance from the sphere.
inline Eigen::VectorXd as_unit(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what = "vector") {
  const double norm = v.norm();
  if (!(std::abs(norm - 1.0) <= kUnitTolerance))
    throw DomainError(std::string(what) + " is not a unit vector (norm " + std::to_string(norm) + ")");
  return v / norm;
}

/// Zonal harmonic of degree n with pole v, evaluated at x: P_n(v . x).
inline double zonal_eval(const GegenbauerTable& table, int n, const Eigen::Ref<const Eigen::VectorXd>& v,
                         const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (v.size() != table.d() || x.size() != table.d())
    throw DimensionMismatch("zonal_eval: vectors must have dimension " + std::to_string(table.d()));
  const double t = as_unit(v, "pole").dot(as_unit(x, "point"));
  return table.eval(n, std::clamp(t, -1.0, 1.0));
}

/// L^2(S^{d-1}) inner product of two zonal harmonics, (sigma_d / N_n) P_n(u . v).
inline double zonal_inner_product(int d, int n, const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v) {
  detail::require_dimension(d, "zonal_inner_product");
  GegenbauerTable table(d, n);
  return sphere_area(d) / static_cast<double>(dim_harmonic(d, n)) * zonal_eval(table, n, u, v);
}

}  // namespace fracdiv
