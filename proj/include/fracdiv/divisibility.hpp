#pragma once

// Fractional divisibility of S^{d-1} by an r-tuple of rotations, decided
// degree by degree through the operator L_n g = sum_s gamma_s.g on H_n.
//
// Coordinates.  H_n is represented in a zonal basis P_n^{v_1..v_N} with
// scaled Gram matrix M_ij = P_n(v_i . v_j) / N.  The coefficient vector c of
// g = sum_j c_j P_n^{v_j} has squared L^2 norm sigma_d c^T M c.  With
// L_ij = (1/N) sum_s P_n(v_i . gamma_s v_j):
//   * L_n acts on coefficients as M^{-1} L,
//   * the adjoint's basis expansion matrix A satisfies A M = L,
//   * in the orthonormal frame w = R^T c (M = R R^T, Cholesky) L_n is
//     T = R^{-1} L R^{-T}, whose singular values are those of L_n itself.
// Singularity ratios are taken from T, so they do not depend on the basis.
// A "singular" verdict is issued only after the extracted kernel element has
// been turned into a divisor and that divisor passes the residual check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracdiv/errors.hpp"
#include "fracdiv/harmonics.hpp"
#include "fracdiv/random.hpp"
#include "fracdiv/rotations.hpp"

namespace fracdiv {

inline constexpr double kDefaultSingTol = 1e-10;
inline constexpr double kDefaultConditionThreshold = 1e8;
inline constexpr int kDefaultMaxAttempts = 50;
inline constexpr double kDivisorResidualTol = 1e-8;
inline constexpr double kWitnessResidualFactor = 1e-6;

class ZonalBasis {
 public:
  /// N_n uniform random poles, resampled as a whole until the Gram matrix has
  /// condition number below `cond_threshold`.
  static ZonalBasis build(int d, int n, Rng& rng, double cond_threshold = kDefaultConditionThreshold,
                          int max_attempts = kDefaultMaxAttempts) {
    detail::require_dimension(d, "build_zonal_basis");
    if (n < 1) throw DomainError("build_zonal_basis: degree n must be >= 1");
    if (max_attempts < 1) throw DomainError("build_zonal_basis: max_attempts must be >= 1");
    auto table = std::make_shared<const GegenbauerTable>(d, n);
    const auto count = static_cast<int>(dim_harmonic(d, n));
    double best = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      Eigen::MatrixXd points(d, count);
      for (int j = 0; j < count; ++j) points.col(j) = rng.sphere_point(d);
      ZonalBasis basis(table, n, std::move(points));
      if (basis.condition_ < cond_threshold) return basis;
      best = std::min(best, basis.condition_);
    }
    throw BasisConstructionError("build_zonal_basis: no admissible basis for d=" + std::to_string(d) +
                                     " n=" + std::to_string(n) + " after " + std::to_string(max_attempts) +
                                     " attempts (best condition " + std::to_string(best) + ")",
                                 best);
  }

  /// Basis with caller-chosen poles (columns of `points`, unit length).
  static ZonalBasis from_points(int n, const Eigen::MatrixXd& points,
                                double cond_threshold = kDefaultConditionThreshold) {
    const auto d = static_cast<int>(points.rows());
    detail::require_dimension(d, "ZonalBasis::from_points");
    if (n < 1) throw DomainError("ZonalBasis::from_points: degree n must be >= 1");
    if (points.cols() != dim_harmonic(d, n))
      throw DimensionMismatch("ZonalBasis::from_points: need " + std::to_string(dim_harmonic(d, n)) +
                              " poles, got " + std::to_string(points.cols()));
    Eigen::MatrixXd unit(points.rows(), points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) unit.col(j) = as_unit(points.col(j), "pole");
    ZonalBasis basis(std::make_shared<const GegenbauerTable>(d, n), n, std::move(unit));
    if (!(basis.condition_ < cond_threshold))
      throw BasisConstructionError("ZonalBasis::from_points: Gram condition " + std::to_string(basis.condition_) +
                                       " exceeds threshold",
                                   basis.condition_);
    return basis;
  }

  /// Degree-1 basis with the standard basis vectors as poles; then
  /// g(x) = sum_j c_j x_j, i.e. the coefficients are the linear form's pole.
  static ZonalBasis coordinate(int d) { return from_points(1, Eigen::MatrixXd::Identity(d, d)); }

  int d() const { return table_->d(); }
  int n() const { return n_; }
  int size() const { return static_cast<int>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  double condition() const { return condition_; }
  const GegenbauerTable& table() const { return *table_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return llt_; }

  double polynomial(double t) const { return table_->eval_unchecked(n_, std::clamp(t, -1.0, 1.0)); }

 private:
  ZonalBasis(std::shared_ptr<const GegenbauerTable> table, int n, Eigen::MatrixXd points)
      : table_(std::move(table)), n_(n), points_(std::move(points)) {
    const auto count = points_.cols();
    const Eigen::MatrixXd dots = points_.transpose() * points_;
    gram_.resize(count, count);
    for (Eigen::Index i = 0; i < count; ++i)
      for (Eigen::Index j = 0; j < count; ++j) gram_(i, j) = polynomial(dots(i, j)) / static_cast<double>(count);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    condition_ = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (lo > 0) llt_.compute(gram_);
  }

  std::shared_ptr<const GegenbauerTable> table_;
  int n_;
  Eigen::MatrixXd points_;
  Eigen::MatrixXd gram_;
  double condition_ = std::numeric_limits<double>::infinity();
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline ZonalBasis build_zonal_basis(int d, int n, Rng& rng, double cond_threshold = kDefaultConditionThreshold,
                                    int max_attempts = kDefaultMaxAttempts) {
  return ZonalBasis::build(d, n, rng, cond_threshold, max_attempts);
}

/// g = sum_j c_j P_n^{v_j} over a shared zonal basis.
class HarmonicFunction {
 public:
  HarmonicFunction(std::shared_ptr<const ZonalBasis> basis, Eigen::VectorXd coeffs)
      : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != basis_->size())
      throw DimensionMismatch("HarmonicFunction: " + std::to_string(coeffs_.size()) + " coefficients for a basis of size " +
                              std::to_string(basis_->size()));
  }

  const ZonalBasis& basis() const { return *basis_; }
  std::shared_ptr<const ZonalBasis> basis_ptr() const { return basis_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  int degree() const { return basis_->n(); }
  int d() const { return basis_->d(); }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != d()) throw DimensionMismatch("HarmonicFunction: point dimension mismatch");
    const Eigen::VectorXd dots = basis_->points().transpose() * x;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < dots.size(); ++j) sum += coeffs_[j] * basis_->polynomial(dots[j]);
    return sum;
  }

  /// sum_j |c_j|, an upper bound for sup |g| since |P_n| <= 1.
  double sup_bound() const { return coeffs_.lpNorm<1>(); }

  /// Exact L^2(S^{d-1}) norm, sqrt(sigma_d c^T M c).
  double l2_norm() const {
    return std::sqrt(std::max(0.0, sphere_area(d()) * coeffs_.dot(basis_->gram() * coeffs_)));
  }

  SphereFunction as_function() const {
    return [self = *this](const Eigen::VectorXd& x) { return self(x); };
  }

 private:
  std::shared_ptr<const ZonalBasis> basis_;
  Eigen::VectorXd coeffs_;
};

/// L_ij = (1/N) sum_s P_n(v_i . (gamma_s v_j)).
inline Eigen::MatrixXd build_L_matrix(const ZonalBasis& basis, const RotationTuple& tuple) {
  if (tuple.d() != basis.d())
    throw DimensionMismatch("build_L_matrix: tuple dimension " + std::to_string(tuple.d()) + " vs basis dimension " +
                            std::to_string(basis.d()));
  const auto count = basis.size();
  const Eigen::MatrixXd& v = basis.points();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(count, count);
  for (const Rotation& g : tuple) {
    const Eigen::MatrixXd dots = v.transpose() * (g.matrix() * v);
    for (int j = 0; j < count; ++j)
      for (int i = 0; i < count; ++i) l(i, j) += basis.polynomial(dots(i, j));
  }
  return l / static_cast<double>(count);
}

/// A with A M = L: row i expands L_n^*(P_n^{v_i}) in the zonal basis.
inline Eigen::MatrixXd operator_matrix(const ZonalBasis& basis, const RotationTuple& tuple) {
  if (basis.cholesky().info() != Eigen::Success)
    throw InternalInconsistency("operator_matrix: Gram matrix is not positive definite");
  const Eigen::MatrixXd l = build_L_matrix(basis, tuple);
  return basis.cholesky().solve(l.transpose()).transpose();
}

/// Matrix of L_n in the Cholesky-orthonormal frame, T = R^{-1} L R^{-T}.
inline Eigen::MatrixXd orthonormal_operator_matrix(const ZonalBasis& basis, const RotationTuple& tuple) {
  if (basis.cholesky().info() != Eigen::Success)
    throw InternalInconsistency("orthonormal_operator_matrix: Gram matrix is not positive definite");
  const Eigen::MatrixXd l = build_L_matrix(basis, tuple);
  const auto lower = basis.cholesky().matrixL();
  const Eigen::MatrixXd left = lower.solve(l);                                     // R^{-1} L
  return lower.solve(left.transpose()).transpose();                                // (R^{-1} (R^{-1} L)^T)^T
}

/// Singular values of L_n as an operator on H_n (L^2 norm), descending.
inline Eigen::VectorXd operator_singular_values(const ZonalBasis& basis, const RotationTuple& tuple) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(orthonormal_operator_matrix(basis, tuple)).singularValues();
}

/// sigma_min / r.  Each gamma_s acts isometrically, so r bounds the operator
/// norm; dividing by sigma_max instead would be useless for d = 2, where L_n
/// is a multiple of a rotation and all singular values coincide.
inline double relative_sigma_min(const Eigen::VectorXd& singular_values, int r) {
  return singular_values.minCoeff() / r;
}

struct KernelWitness {
  HarmonicFunction g;
  double sigma_min_rel = 0.0;
  double residual_sup = 0.0;  // Monte-Carlo sup of |sum_s g(gamma_s^T x)|
  int samples = 0;
  bool contract_ok = false;   // residual_sup <= 1e-6 N_n
};

inline double tuple_sum_residual(const HarmonicFunction& g, const RotationTuple& tuple, const Eigen::VectorXd& x) {
  double sum = 0.0;
  for (const Rotation& s : tuple) sum += g(s.apply_inverse(x));
  return sum;
}

/// Kernel element of L_n from the right singular vector of T for its
/// smallest singular value, mapped back to zonal coefficients and scaled to
/// sum_j |c_j| = 1.
inline KernelWitness kernel_witness(std::shared_ptr<const ZonalBasis> basis, const RotationTuple& tuple,
                                    double sing_tol, Rng& rng, int samples = 10000) {
  const Eigen::MatrixXd t = orthonormal_operator_matrix(*basis, tuple);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeFullV);
  const double ratio = relative_sigma_min(svd.singularValues(), tuple.r());
  if (!(ratio < sing_tol))
    throw NotSingularError("kernel_witness: sigma_min ratio " + std::to_string(ratio) + " is not below " +
                           std::to_string(sing_tol));
  const Eigen::VectorXd w = svd.matrixV().col(t.cols() - 1);
  Eigen::VectorXd c = basis->cholesky().matrixU().solve(w);  // c = R^{-T} w
  c /= c.lpNorm<1>();
  KernelWitness out{HarmonicFunction(std::move(basis), std::move(c)), ratio, 0.0, samples, false};
  for (int k = 0; k < samples; ++k) {
    const Eigen::VectorXd x = rng.sphere_point(tuple.d());
    out.residual_sup = std::max(out.residual_sup, std::abs(tuple_sum_residual(out.g, tuple, x)));
  }
  out.contract_ok = out.residual_sup <= kWitnessResidualFactor * out.g.basis().size();
  return out;
}

/// f = 1/r + scale g with 0 < f < 1 everywhere.
class DivisorFunction {
 public:
  DivisorFunction(int r, HarmonicFunction g, double scale) : r_(r), g_(std::move(g)), scale_(scale) {}

  int r() const { return r_; }
  const HarmonicFunction& witness() const { return g_; }
  double scale() const { return scale_; }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const { return 1.0 / r_ + scale_ * g_(x); }

  // Guaranteed range [1/r - scale B, 1/r + scale B] with B = sum |c_j|.
  double lower_bound() const { return 1.0 / r_ - scale_ * g_.sup_bound(); }
  double upper_bound() const { return 1.0 / r_ + scale_ * g_.sup_bound(); }

  SphereFunction as_function() const {
    return [self = *this](const Eigen::VectorXd& x) { return self(x); };
  }

 private:
  int r_;
  HarmonicFunction g_;
  double scale_;
};

/// scale = margin (1/r) / B, B = sum_j |c_j| >= sup |g|.
inline DivisorFunction make_divisor(const HarmonicFunction& g, int r, double margin = 0.5) {
  if (r < 1) throw DomainError("make_divisor: r must be >= 1");
  if (!(margin > 0.0 && margin < 1.0)) throw DomainError("make_divisor: margin must lie in (0, 1)");
  const double bound = g.sup_bound();
  if (!(bound > 0.0)) throw ZeroWitnessError("make_divisor: witness is the zero function");
  return DivisorFunction(r, g, margin / (r * bound));
}

struct VerificationResult {
  int samples = 0;
  int skipped = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double variance = 0.0;
  bool passed = false;
};

/// Samples uniform sphere points and measures |sum_s f(gamma_s^T x) - 1|.
/// Points flagged by `skip` (a measure-zero boundary set) are not scored.
inline VerificationResult verify_divisor(const RotationTuple& tuple, const SphereFunction& f, int samples, Rng& rng,
                                         const std::function<bool(const Eigen::VectorXd&)>& skip = {}) {
  VerificationResult out;
  double mean_f = 0.0, m2 = 0.0, residual_sum = 0.0;
  int scored = 0;
  for (int k = 0; k < samples; ++k) {
    const Eigen::VectorXd x = rng.sphere_point(tuple.d());
    if (skip && skip(x)) {
      ++out.skipped;
      continue;
    }
    double sum = 0.0;
    for (const Rotation& g : tuple) sum += f(g.apply_inverse(x));
    const double residual = std::abs(sum - 1.0);
    out.max_residual = std::max(out.max_residual, residual);
    residual_sum += residual;
    const double value = f(x);
    ++scored;
    const double delta = value - mean_f;
    mean_f += delta / scored;
    m2 += delta * (value - mean_f);
  }
  out.samples = scored;
  out.mean_residual = scored ? residual_sum / scored : 0.0;
  out.variance = scored > 1 ? m2 / (scored - 1) : 0.0;
  out.passed = scored > 0 && out.max_residual <= kDivisorResidualTol && out.variance > 0.0;
  return out;
}

inline VerificationResult verify_divisor(const RotationTuple& tuple, const DivisorFunction& f, int samples, Rng& rng) {
  return verify_divisor(tuple, f.as_function(), samples, rng);
}

enum class Verdict { Invertible, Singular, Borderline };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Invertible: return "invertible";
    case Verdict::Singular: return "singular";
    case Verdict::Borderline: return "borderline";
  }
  return "?";
}

struct DegreeRecord {
  int n = 0;
  std::int64_t N_n = 0;
  double sigma_min_rel = 0.0;
  double sigma_min = 0.0;  // L^2 operator singular values of L_n
  double sigma_max = 0.0;
  Verdict verdict = Verdict::Invertible;
  int bases_tried = 1;
};

struct Certificate {
  int n = 0;
  Eigen::MatrixXd poles;  // d x N_n, columns
  Eigen::VectorXd coeffs;
  double witness_residual_sup = 0.0;
  double divisor_scale = 0.0;
  VerificationResult verification;
};

inline constexpr const char* kOverallDivisible = "fractionally divisible";
inline constexpr const char* kOverallNoWitness = "no divisibility witness below degree n_max";

struct DivisibilityOptions {
  double sing_tol = kDefaultSingTol;
  std::uint64_t seed = 0;
  double cond_threshold = kDefaultConditionThreshold;
  int max_attempts = kDefaultMaxAttempts;
  int witness_samples = 10000;
  int verify_samples = 10000;
  double margin = 0.5;
  bool stop_at_certificate = false;
};

struct DivisibilityReport {
  int d = 0;
  int r = 0;
  int n_max = 0;
  DivisibilityOptions options;
  std::vector<DegreeRecord> degrees;
  bool divisible = false;
  std::optional<Certificate> certificate;

  std::string overall() const { return divisible ? kOverallDivisible : kOverallNoWitness; }

  double min_sigma_min_rel() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& rec : degrees) m = std::min(m, rec.sigma_min_rel);
    return m;
  }
};

struct DegreeOutcome {
  DegreeRecord record;
  std::optional<Certificate> certificate;
};

// One degree of the decision procedure.  Degree n draws its bases from
// derive_seed(seed, n), so degrees can be evaluated in any order.
inline DegreeOutcome test_degree(const RotationTuple& tuple, int n, const DivisibilityOptions& opts) {
  DegreeOutcome out;
  out.record.n = n;
  out.record.N_n = dim_harmonic(tuple.d(), n);
  const std::uint64_t degree_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(n));
  const double tol = opts.sing_tol;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Rng rng(derive_seed(degree_seed, static_cast<std::uint64_t>(attempt)));
    auto basis = std::make_shared<const ZonalBasis>(
        ZonalBasis::build(tuple.d(), n, rng, opts.cond_threshold, opts.max_attempts));
    const Eigen::VectorXd sv = operator_singular_values(*basis, tuple);
    out.record.bases_tried = attempt + 1;
    out.record.sigma_max = sv.maxCoeff();
    out.record.sigma_min = sv.minCoeff();
    out.record.sigma_min_rel = relative_sigma_min(sv, tuple.r());
    if (out.record.sigma_min_rel >= 10.0 * tol) {
      out.record.verdict = Verdict::Invertible;
      return out;
    }
    if (out.record.sigma_min_rel >= tol) {
      out.record.verdict = Verdict::Borderline;
      continue;  // rerun once with a fresh basis
    }
    KernelWitness w = kernel_witness(basis, tuple, tol, rng, opts.witness_samples);
    const DivisorFunction f = make_divisor(w.g, tuple.r(), opts.margin);
    Certificate cert{n, basis->points(), w.g.coeffs(), w.residual_sup, f.scale(),
                     verify_divisor(tuple, f, opts.verify_samples, rng)};
    if (w.contract_ok && cert.verification.passed) {
      out.record.verdict = Verdict::Singular;
      out.certificate = std::move(cert);
    } else {
      out.record.verdict = Verdict::Borderline;
    }
    return out;
  }
  return out;
}

/// Runs degrees 1..n_max.  The test is one-sided: a certificate proves
/// divisibility, its absence below n_max proves nothing.
inline DivisibilityReport divisibility_test(const RotationTuple& tuple, int n_max,
                                            const DivisibilityOptions& opts = {}) {
  if (n_max < 1) throw DomainError("divisibility_test: n_max must be >= 1");
  if (!(opts.sing_tol > 0)) throw DomainError("divisibility_test: sing_tol must be positive");
  DivisibilityReport report;
  report.d = tuple.d();
  report.r = tuple.r();
  report.n_max = n_max;
  report.options = opts;
  for (int n = 1; n <= n_max; ++n) {
    DegreeOutcome outcome = test_degree(tuple, n, opts);
    report.degrees.push_back(outcome.record);
    if (outcome.record.verdict == Verdict::Singular) {
      report.divisible = true;
      if (!report.certificate) report.certificate = std::move(outcome.certificate);
      if (opts.stop_at_certificate) break;
    }
  }
  return report;
}

}  // namespace fracdiv
