#pragma once

// Elements and tuples of SO(d).

#include <cmath>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracdiv/errors.hpp"
#include "fracdiv/harmonics.hpp"
#include "fracdiv/random.hpp"

namespace fracdiv {

inline constexpr double kOrthogonalityTolerance = 1e-9;
inline constexpr double kRepairLimit = 1e-4;

using SphereFunction = std::function<double(const Eigen::VectorXd&)>;

/// Nearest orthogonal matrix in Frobenius norm (orthogonal polar factor).
inline Eigen::MatrixXd polar_repair(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

inline double orthogonality_error(const Eigen::MatrixXd& m) {
  const auto n = m.cols();
  return (m.transpose() * m - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

class Rotation {
 public:
  static Rotation identity(int d) {
    detail::require_dimension(d, "Rotation::identity");
    return Rotation(Eigen::MatrixXd::Identity(d, d));
  }

  // Validates a candidate matrix.  Orthogonality defects in
  // (kOrthogonalityTolerance, kRepairLimit] are repaired by polar
  // decomposition and reported through `repaired`; larger defects and
  // det != 1 are rejected.
  static Rotation from_matrix(const Eigen::MatrixXd& m, bool* repaired = nullptr) {
    if (repaired) *repaired = false;
    if (m.rows() != m.cols())
      throw InvalidRotation("rotation matrix must be square, got " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
    if (m.rows() < 2) throw InvalidRotation("rotation dimension must be >= 2");
    if (!m.allFinite()) throw InvalidRotation("rotation matrix has non-finite entries");
    Eigen::MatrixXd q = m;
    const double err = orthogonality_error(m);
    if (err > kRepairLimit)
      throw InvalidRotation("orthogonality violated: max|g^T g - I| = " + std::to_string(err) +
                            " exceeds repair limit 1e-4");
    if (err > kOrthogonalityTolerance) {
      q = polar_repair(m);
      if (repaired) *repaired = true;
    }
    const double det = q.determinant();
    if (std::abs(det - 1.0) > kOrthogonalityTolerance)
      throw InvalidRotation("determinant must be +1, got " + std::to_string(det));
    return Rotation(std::move(q));
  }

  int d() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  Rotation inverse() const { return Rotation(m_.transpose()); }

  friend Rotation operator*(const Rotation& a, const Rotation& b) {
    if (a.d() != b.d()) throw DimensionMismatch("cannot compose rotations of different dimension");
    return Rotation(a.m_ * b.m_);
  }

  // Raw matrix-vector product, no unit check.
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const { return m_ * x; }
  Eigen::VectorXd apply_inverse(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return m_.transpose() * x;
  }

 private:
  explicit Rotation(Eigen::MatrixXd m) : m_(std::move(m)) {}
  friend Rotation cayley(const Eigen::MatrixXd& skew);
  friend Rotation haar_sample(int d, Rng& rng);
  friend Rotation planar_rotation(int d, int i, int j, double angle);
  friend Rotation diagonal_rotation(std::span<const int> signs);

  Eigen::MatrixXd m_;
};

/// Ordered r-tuple of rotations of a common dimension, r >= 2.
class RotationTuple {
 public:
  RotationTuple() = default;
  explicit RotationTuple(std::vector<Rotation> rotations) : rotations_(std::move(rotations)) {
    if (rotations_.size() < 2)
      throw InputError("rotation tuple needs r >= 2 rotations, got " + std::to_string(rotations_.size()));
    for (std::size_t s = 1; s < rotations_.size(); ++s)
      if (rotations_[s].d() != rotations_[0].d())
        throw DimensionMismatch("rotation " + std::to_string(s) + " has dimension " +
                                std::to_string(rotations_[s].d()) + ", expected " +
                                std::to_string(rotations_[0].d()));
  }
  RotationTuple(std::initializer_list<Rotation> rotations) : RotationTuple(std::vector<Rotation>(rotations)) {}

  int d() const { return rotations_.empty() ? 0 : rotations_.front().d(); }
  int r() const { return static_cast<int>(rotations_.size()); }
  const Rotation& operator[](std::size_t s) const { return rotations_[s]; }
  const std::vector<Rotation>& rotations() const { return rotations_; }
  auto begin() const { return rotations_.begin(); }
  auto end() const { return rotations_.end(); }

  static RotationTuple copies(const Rotation& g, int r) {
    return RotationTuple(std::vector<Rotation>(static_cast<std::size_t>(r), g));
  }

 private:
  std::vector<Rotation> rotations_;
};

inline Eigen::VectorXd act_point(const Rotation& g, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != g.d())
    throw DimensionMismatch("act_point: point has dimension " + std::to_string(x.size()) + ", rotation " +
                            std::to_string(g.d()));
  Eigen::VectorXd y = g.apply(as_unit(x, "point"));
  return y / y.norm();
}

/// (g.f)(v) = f(g^{-1} v).
inline SphereFunction act_function(const Rotation& g, SphereFunction f) {
  return [g, f = std::move(f)](const Eigen::VectorXd& v) {
    if (v.size() != g.d())
      throw DimensionMismatch("act_function: point has dimension " + std::to_string(v.size()) +
                              ", rotation " + std::to_string(g.d()));
    return f(g.apply_inverse(v));
  };
}

/// Haar-distributed element of SO(d): QR of a Gaussian matrix with the
/// triangular factor's diagonal made positive, then the last column negated
/// if the determinant is -1.
inline Rotation haar_sample(int d, Rng& rng) {
  detail::require_dimension(d, "haar_sample");
  const Eigen::MatrixXd z = rng.gaussian_matrix(d, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int k = 0; k < d; ++k)
    if (r(k, k) < 0) q.col(k) *= -1.0;
  if (q.determinant() < 0) q.col(d - 1) *= -1.0;
  return Rotation(std::move(q));
}

/// Rotation by `angle` in the (x_i, x_j) coordinate plane, 1-based indices.
inline Rotation planar_rotation(int d, int i, int j, double angle) {
  detail::require_dimension(d, "planar_rotation");
  if (!(1 <= i && i < j && j <= d))
    throw DomainError("planar_rotation: need 1 <= i < j <= d, got i=" + std::to_string(i) +
                      " j=" + std::to_string(j) + " d=" + std::to_string(d));
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  const double c = std::cos(angle), s = std::sin(angle);
  m(i - 1, i - 1) = c;
  m(i - 1, j - 1) = -s;
  m(j - 1, i - 1) = s;
  m(j - 1, j - 1) = c;
  return Rotation(std::move(m));
}

/// Diagonal +-1 matrix with an even number of -1 entries.
inline Rotation diagonal_rotation(std::span<const int> signs) {
  int negatives = 0;
  for (int s : signs) {
    if (s != 1 && s != -1) throw DomainError("diagonal_rotation: entries must be +-1");
    negatives += s < 0;
  }
  if (negatives % 2) throw InvalidRotation("diagonal_rotation: determinant would be -1");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(signs.size()),
                                            static_cast<Eigen::Index>(signs.size()));
  for (std::size_t k = 0; k < signs.size(); ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = signs[k];
  return Rotation(std::move(m));
}

/// Cayley chart (I - S)(I + S)^{-1} of a skew-symmetric S.  The result is
/// re-orthonormalized by polar repair.
inline Rotation cayley(const Eigen::MatrixXd& skew) {
  const auto d = skew.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd q = (eye + skew).transpose().partialPivLu().solve((eye - skew).transpose()).transpose();
  if (orthogonality_error(q) > 1e-14) q = polar_repair(q);
  return Rotation(std::move(q));
}

/// Skew-symmetric matrix from its d(d-1)/2 strictly-upper entries, row-major.
inline Eigen::MatrixXd skew_from_params(int d, std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(d * (d - 1) / 2))
    throw DimensionMismatch("skew_from_params: expected " + std::to_string(d * (d - 1) / 2) + " parameters");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  std::size_t k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      s(i, j) = params[k];
      s(j, i) = -params[k];
      ++k;
    }
  return s;
}

inline constexpr double kFixedPointTolerance = 1e-6;

/// Unit u with g u = u: a null vector of (g - I) from the SVD.  When the null
/// space has dimension > 1, the projection of the first standard basis
/// vector with a substantial component is used.  Sign convention: first
/// nonzero coordinate positive.
inline Eigen::VectorXd fixed_point(const Rotation& g) {
  const int d = g.d();
  const Eigen::MatrixXd shifted = g.matrix() - Eigen::MatrixXd::Identity(d, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv[d - 1] > kFixedPointTolerance)
    throw NoFixedPoint("rotation has no fixed point: smallest singular value of (g - I) is " +
                       std::to_string(sv[d - 1]));
  int null_dim = 0;
  for (int k = 0; k < d; ++k) null_dim += sv[k] <= kFixedPointTolerance;
  const Eigen::MatrixXd basis = svd.matrixV().rightCols(null_dim);

  Eigen::VectorXd u = basis.col(null_dim - 1);
  if (null_dim > 1) {
    const double threshold = 0.5 / d;
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd p = basis * basis.row(k).transpose();
      if (p.squaredNorm() >= threshold) {
        u = p;
        break;
      }
    }
  }
  u.normalize();
  for (int k = 0; k < d; ++k) {
    if (std::abs(u[k]) > 1e-12) {
      if (u[k] < 0) u = -u;
      break;
    }
  }
  return u;
}

}  // namespace fracdiv
