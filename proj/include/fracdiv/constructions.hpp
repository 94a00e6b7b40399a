#pragma once

// Explicit divisible families and the closed-form analysis of SO(2).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracdiv/divisibility.hpp"
#include "fracdiv/errors.hpp"
#include "fracdiv/rotations.hpp"

namespace fracdiv {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kBoundaryTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Planar division: rotations of the (x_1, x_2)-plane by 2 pi m / r and the
// indicator of the angular sector [0, 2 pi / r).  The r translates of the
// sector tile the complement of the codimension-2 axis {x_1 = x_2 = 0}.

struct PlanarDivision {
  int d = 0;
  int r = 0;
  RotationTuple tuple;

  // Angle of (x_1, x_2) normalized to [0, 2 pi).
  static double plane_angle(const Eigen::VectorXd& x) {
    double a = std::atan2(x[1], x[0]);
    if (a < 0) a += kTwoPi;
    return a >= kTwoPi ? 0.0 : a;
  }

  double sector_width() const { return kTwoPi / r; }

  double indicator(const Eigen::VectorXd& x) const {
    if (x[0] == 0.0 && x[1] == 0.0) return 0.0;
    return plane_angle(x) < sector_width() ? 1.0 : 0.0;
  }

  // Within kBoundaryTolerance (Euclidean) of a sector edge or of the axis.
  bool near_boundary(const Eigen::VectorXd& x) const {
    const double radius = std::hypot(x[0], x[1]);
    if (radius < kBoundaryTolerance) return true;
    const double a = plane_angle(x);
    const double k = std::round(a / sector_width());
    return radius * std::abs(a - k * sector_width()) < kBoundaryTolerance;
  }

  SphereFunction indicator_function() const {
    return [self = *this](const Eigen::VectorXd& x) { return self.indicator(x); };
  }
  std::function<bool(const Eigen::VectorXd&)> boundary_predicate() const {
    return [self = *this](const Eigen::VectorXd& x) { return self.near_boundary(x); };
  }
};

inline PlanarDivision planar_division(int d, int r) {
  detail::require_dimension(d, "planar_division");
  if (r < 2) throw DomainError("planar_division: r must be >= 2");
  std::vector<Rotation> rotations;
  for (int m = 0; m < r; ++m) rotations.push_back(planar_rotation(d, 1, 2, kTwoPi * m / r));
  return PlanarDivision{d, r, RotationTuple(std::move(rotations))};
}

// ---------------------------------------------------------------------------
// Odd d = 2m + 1, r = 4.  The suffix
//   D(-1^(2m-1), -1, 1), D(-1^(2m-1), 1, -1), D(1^(2m-1), -1, -1)
// sums to -I, so on H_1 (identified with R^d) it acts as -id.  Any gamma_1
// fixes some unit u, and g(x) = u . x is annihilated by the full tuple.

inline std::vector<Rotation> odd_d4_suffix(int d) {
  if (d < 3 || d % 2 == 0)
    throw DomainError("odd_d4_suffix: d must be odd and >= 3, got " + std::to_string(d));
  const int head = d - 2;
  std::vector<int> s2(head, -1), s3(head, -1), s4(head, 1);
  s2.insert(s2.end(), {-1, 1});
  s3.insert(s3.end(), {1, -1});
  s4.insert(s4.end(), {-1, -1});
  return {diagonal_rotation(s2), diagonal_rotation(s3), diagonal_rotation(s4)};
}

struct OddD4Construction {
  RotationTuple tuple;
  Eigen::VectorXd pole;  // fixed point of gamma_1
  HarmonicFunction witness;
};

inline OddD4Construction odd_d4_tuple(int d, const Rotation& first) {
  if (d < 3 || d % 2 == 0)
    throw DomainError("odd_d4_tuple: d must be odd and >= 3, got " + std::to_string(d));
  if (first.d() != d) throw DimensionMismatch("odd_d4_tuple: gamma_1 has the wrong dimension");
  std::vector<Rotation> rotations{first};
  for (Rotation& g : odd_d4_suffix(d)) rotations.push_back(std::move(g));
  Eigen::VectorXd u = fixed_point(first);
  auto basis = std::make_shared<const ZonalBasis>(ZonalBasis::coordinate(d));
  return OddD4Construction{RotationTuple(std::move(rotations)), u, HarmonicFunction(basis, u)};
}

/// Monte-Carlo sup of |sum_s g(gamma_s^T x)|.
inline double witness_residual(const HarmonicFunction& g, const RotationTuple& tuple, int samples, Rng& rng) {
  double sup = 0.0;
  for (int k = 0; k < samples; ++k)
    sup = std::max(sup, std::abs(tuple_sum_residual(g, tuple, rng.sphere_point(tuple.d()))));
  return sup;
}

/// For a degree-1 harmonic sum_j c_j P_1(v_j . x) = (sum_j c_j v_j) . x, the
/// unit pole sum_j c_j v_j / |.|.
inline Eigen::VectorXd linear_pole(const HarmonicFunction& g) {
  if (g.degree() != 1) throw DomainError("linear_pole: harmonic must have degree 1");
  Eigen::VectorXd p = g.basis().points() * g.coeffs();
  const double norm = p.norm();
  if (!(norm > 0)) throw ZeroWitnessError("linear_pole: zero harmonic");
  return p / norm;
}

// ---------------------------------------------------------------------------
// d = 2.  On H_n with basis (c, s), c(cos a, sin a) = cos(n a) and
// s(cos a, sin a) = sin(n a), the rotation by phi acts as
//   M_phi = [[cos n phi, -sin n phi], [sin n phi, cos n phi]].
// The fixed rotations phi_2..phi_r contribute K = sum_s M_{phi_s}; gamma_1
// varies and L_n = M_phi + K.

inline Eigen::Matrix2d d2_action_matrix(int n, double phi) {
  const double c = std::cos(n * phi), s = std::sin(n * phi);
  Eigen::Matrix2d m;
  m << c, -s, s, c;
  return m;
}

inline Eigen::Matrix2d d2_K_matrix(int n, std::span<const double> angles) {
  if (angles.empty()) throw DomainError("d2_K_matrix: need at least one fixed angle (r >= 2)");
  Eigen::Matrix2d k = Eigen::Matrix2d::Zero();
  for (double phi : angles) k += d2_action_matrix(n, phi);
  return k;
}

/// det(M_phi + K) written in x = cos(n phi), y = branch * sqrt(1 - x^2).
inline double d2_det(double x, int branch, const Eigen::Matrix2d& k) {
  if (!(std::abs(x) <= 1.0)) throw DomainError("d2_det: x must lie in [-1, 1], got " + std::to_string(x));
  if (branch != 1 && branch != -1) throw DomainError("d2_det: branch must be +1 or -1");
  const double y = branch * std::sqrt(std::max(0.0, 1.0 - x * x));
  return y * (k(1, 0) - k(0, 1)) + x * (k(0, 0) + k(1, 1)) + k.determinant() + 1.0;
}

namespace detail {

inline double d2_det_theta(double theta, const Eigen::Matrix2d& k) {
  Eigen::Matrix2d m;
  m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return (m + k).determinant();
}

// Golden-section minimization of |det| in a small window around theta.
inline double polish_theta(double theta, const Eigen::Matrix2d& k, double window = 1e-6) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = theta - window, hi = theta + window;
  auto f = [&](double t) { return std::abs(d2_det_theta(t, k)); };
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - ratio * (hi - lo); f1 = f(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + ratio * (hi - lo); f2 = f(x2);
    }
  }
  const double best = 0.5 * (lo + hi);
  return f(best) <= f(theta) ? best : theta;
}

inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

}  // namespace detail

inline constexpr double kBadAngleFilter = 1e-10;

/// All phi in [0, 2 pi) with det(M_{n phi} + K) = 0, for an arbitrary 2x2 K.
/// Throws InternalInconsistency when the squared equation vanishes
/// identically, which cannot happen for K built from rotations.
inline std::vector<double> d2_bad_angles_for_K(int n, const Eigen::Matrix2d& k) {
  if (n < 1) throw DomainError("d2_bad_angles: degree n must be >= 1");
  // p^2 (1 - x^2) = (c + q x)^2  with  p = K21 - K12, q = K11 + K22, c = det K + 1.
  const double p = k(1, 0) - k(0, 1);
  const double q = k(0, 0) + k(1, 1);
  const double c = k.determinant() + 1.0;
  const double qa = p * p + q * q;
  const double qb = 2.0 * q * c;
  const double qc = c * c - p * p;
  const double scale = std::max({1.0, k.cwiseAbs().maxCoeff() * k.cwiseAbs().maxCoeff()});
  if (std::max({std::abs(qa), std::abs(qb), std::abs(qc)}) < 1e-12 * scale)
    throw InternalInconsistency("d2_bad_angles: determinant polynomial vanishes identically (det K = -1 with "
                                "symmetric traceless K), impossible for a sum of rotation matrices");

  std::vector<double> xs;
  if (std::abs(qa) < 1e-14 * scale) {
    if (std::abs(qb) > 1e-14 * scale) xs.push_back(-qc / qb);
  } else {
    double disc = qb * qb - 4.0 * qa * qc;
    const double disc_tol = 1e-9 * (qb * qb + std::abs(4.0 * qa * qc)) + 1e-14;
    if (disc >= -disc_tol) {
      disc = std::max(0.0, disc);
      const double root = std::sqrt(disc);
      xs.push_back((-qb + root) / (2.0 * qa));
      if (root > 0) xs.push_back((-qb - root) / (2.0 * qa));
    }
  }

  std::vector<double> thetas;
  for (double x : xs) {
    if (std::abs(x) > 1.0 + 1e-9) continue;
    x = std::clamp(x, -1.0, 1.0);
    for (int branch : {1, -1}) {
      if (std::abs(d2_det(x, branch, k)) > kBadAngleFilter) continue;
      const double y = branch * std::sqrt(std::max(0.0, 1.0 - x * x));
      thetas.push_back(detail::polish_theta(std::atan2(y, x), k));
    }
  }

  std::vector<double> phis;
  for (double theta : thetas)
    for (int j = 0; j < n; ++j) phis.push_back(detail::wrap_angle((theta + kTwoPi * j) / n));
  std::sort(phis.begin(), phis.end());
  std::vector<double> out;
  for (double phi : phis)
    if (out.empty() || phi - out.back() > 1e-9) out.push_back(phi);
  if (out.size() > 1 && out.front() + kTwoPi - out.back() <= 1e-9) out.pop_back();
  return out;
}

inline std::vector<double> d2_bad_angles(int n, std::span<const double> angles) {
  return d2_bad_angles_for_K(n, d2_K_matrix(n, angles));
}

struct D2Analysis {
  int n = 0;
  std::vector<double> angles;
  Eigen::Matrix2d K;
  std::vector<double> bad_angles;
};

inline D2Analysis d2_analyze(int n, std::vector<double> angles) {
  D2Analysis out;
  out.n = n;
  out.K = d2_K_matrix(n, angles);
  out.bad_angles = d2_bad_angles_for_K(n, out.K);
  out.angles = std::move(angles);
  return out;
}

/// Full SO(2) tuple (rotation by phi, rotations by the fixed angles).
inline RotationTuple d2_tuple(double phi, std::span<const double> angles) {
  std::vector<Rotation> rotations{planar_rotation(2, 1, 2, phi)};
  for (double a : angles) rotations.push_back(planar_rotation(2, 1, 2, a));
  return RotationTuple(std::move(rotations));
}

}  // namespace fracdiv
