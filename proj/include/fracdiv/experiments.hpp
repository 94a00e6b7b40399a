#pragma once

// Monte-Carlo genericity studies and a derivative-free search for divisible
// tuples.  Trial k of a study and restart k of a search draw from
// derive_seed(seed, k), so results do not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "fracdiv/divisibility.hpp"
#include "fracdiv/nelder_mead.hpp"
#include "fracdiv/random.hpp"
#include "fracdiv/rotations.hpp"

namespace fracdiv {

/// Number of free rotations for which sections are predicted to be small:
/// floor(r/2) for d >= 3, 1 for d = 2.
inline int default_free_count(int d, int r) { return d == 2 ? 1 : r / 2; }

enum class FreeSampling {
  Haar,            // gamma_1..gamma_ell independent Haar samples
  CopyFirstFixed,  // gamma_1 = ... = gamma_ell = gamma_{ell+1}
};

struct GenericityStudy {
  int d = 3;
  int r = 3;
  int ell = 1;
  std::vector<Rotation> suffix;  // gamma_{ell+1}..gamma_r
  int trials = 100;
  int n_max = 5;
  std::uint64_t seed = 0;
  double sing_tol = kDefaultSingTol;
  FreeSampling sampling = FreeSampling::Haar;
  int threads = 1;

  void validate() const {
    detail::require_dimension(d, "GenericityStudy");
    if (r < 2) throw DomainError("GenericityStudy: r must be >= 2");
    if (ell < 1 || ell > r) throw DomainError("GenericityStudy: need 1 <= ell <= r");
    if (trials < 1) throw DomainError("GenericityStudy: trials must be >= 1");
    if (n_max < 1) throw DomainError("GenericityStudy: n_max must be >= 1");
    if (static_cast<int>(suffix.size()) != r - ell)
      throw DomainError("GenericityStudy: suffix must hold r - ell = " + std::to_string(r - ell) + " rotations, got " +
                        std::to_string(suffix.size()));
    for (const Rotation& g : suffix)
      if (g.d() != d) throw DimensionMismatch("GenericityStudy: suffix rotation has the wrong dimension");
    if (sampling == FreeSampling::CopyFirstFixed && suffix.empty())
      throw DomainError("GenericityStudy: copy sampling needs a nonempty suffix");
  }
};

struct TrialResult {
  int trial = 0;
  bool failed = false;
  std::string error;
  double min_ratio = std::numeric_limits<double>::quiet_NaN();
  int argmin_n = 0;
  double min_sigma = std::numeric_limits<double>::quiet_NaN();  // smallest L^2 operator singular value
  bool singular = false;
  int singular_n = 0;
  double residual_max = std::numeric_limits<double>::quiet_NaN();
  std::vector<DegreeRecord> degrees;
};

struct GenericitySummary {
  int trials = 0;
  int completed = 0;
  int failed = 0;
  int singular = 0;
  double ratio_min = 0, ratio_q1 = 0, ratio_median = 0, ratio_q3 = 0, ratio_max = 0;
  double sigma_min = 0;
  double failure_rate() const { return trials ? static_cast<double>(failed) / trials : 0.0; }
};

struct GenericityResult {
  GenericityStudy study;
  std::vector<TrialResult> trials;
  GenericitySummary summary;
};

inline double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline TrialResult run_trial(const GenericityStudy& study, int k) {
  TrialResult out;
  out.trial = k;
  const std::uint64_t trial_seed = derive_seed(study.seed, static_cast<std::uint64_t>(k));
  Rng rng(trial_seed);
  std::vector<Rotation> rotations;
  for (int s = 0; s < study.ell; ++s)
    rotations.push_back(study.sampling == FreeSampling::Haar ? haar_sample(study.d, rng) : study.suffix.front());
  rotations.insert(rotations.end(), study.suffix.begin(), study.suffix.end());
  try {
    DivisibilityOptions opts;
    opts.sing_tol = study.sing_tol;
    opts.seed = derive_seed(trial_seed, 0xB5);
    const DivisibilityReport report = divisibility_test(RotationTuple(std::move(rotations)), study.n_max, opts);
    out.degrees = report.degrees;
    out.min_ratio = std::numeric_limits<double>::infinity();
    out.min_sigma = std::numeric_limits<double>::infinity();
    for (const DegreeRecord& rec : report.degrees) {
      if (rec.sigma_min_rel < out.min_ratio) {
        out.min_ratio = rec.sigma_min_rel;
        out.argmin_n = rec.n;
      }
      out.min_sigma = std::min(out.min_sigma, rec.sigma_min);
    }
    out.singular = report.divisible;
    if (report.certificate) {
      out.singular_n = report.certificate->n;
      out.residual_max = report.certificate->verification.max_residual;
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

inline GenericityResult run_genericity(const GenericityStudy& study) {
  study.validate();
  GenericityResult result;
  result.study = study;
  result.trials.resize(static_cast<std::size_t>(study.trials));
  const int workers = std::max(1, std::min(study.threads, study.trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k = next++; k < study.trials; k = next++) result.trials[static_cast<std::size_t>(k)] = run_trial(study, k);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  GenericitySummary& s = result.summary;
  s.trials = study.trials;
  std::vector<double> ratios;
  s.sigma_min = std::numeric_limits<double>::infinity();
  for (const TrialResult& t : result.trials) {
    if (t.failed) {
      ++s.failed;
      continue;
    }
    ++s.completed;
    s.singular += t.singular;
    ratios.push_back(t.min_ratio);
    s.sigma_min = std::min(s.sigma_min, t.min_sigma);
  }
  if (!ratios.empty()) {
    s.ratio_min = *std::min_element(ratios.begin(), ratios.end());
    s.ratio_max = *std::max_element(ratios.begin(), ratios.end());
    s.ratio_q1 = quantile(ratios, 0.25);
    s.ratio_median = quantile(ratios, 0.5);
    s.ratio_q3 = quantile(ratios, 0.75);
  }
  return result;
}

// ---------------------------------------------------------------------------

struct SearchSettings {
  int restarts = 4;
  int evaluations_per_round = 3000;
  int recenter_rounds = 8;
  double initial_step = 0.3;
  double step_decay = 0.2;
  double target = 1e-10;
  std::vector<Rotation> base;  // optional starting tuple, size r
  double base_jitter = 0.0;    // Cayley-chart jitter applied to `base` on restarts after the first
  int witness_samples = 10000;
  int verify_samples = 10000;
};

struct SearchRun {
  int d = 0;
  int r = 0;
  int n = 0;
  SearchSettings settings;
  std::optional<RotationTuple> best_tuple;
  double best_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // best-so-far after every objective evaluation
  int evaluations = 0;
  bool certified = false;
  std::optional<VerificationResult> verification;
  double witness_residual_sup = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// gamma_1 stays at base[0]: left-multiplying a whole tuple by one rotation
// preserves divisibility, so it can be fixed without loss.
inline RotationTuple chart_tuple(const std::vector<Rotation>& base, const std::vector<double>& params) {
  const int d = base.front().d();
  const std::size_t block = static_cast<std::size_t>(d * (d - 1) / 2);
  std::vector<Rotation> rotations{base.front()};
  for (std::size_t s = 1; s < base.size(); ++s) {
    std::span<const double> p(params.data() + (s - 1) * block, block);
    rotations.push_back(cayley(skew_from_params(d, p)) * base[s]);
  }
  return RotationTuple(std::move(rotations));
}

}  // namespace detail

/// Minimizes the relative smallest singular value of L_n over r-tuples.
/// Reported divisible only after kernel_witness + verify_divisor succeed.
inline SearchRun search_divisible(int d, int r, int n, const SearchSettings& settings, Rng& rng) {
  detail::require_dimension(d, "search_divisible");
  if (r < 2) throw DomainError("search_divisible: r must be >= 2");
  if (n < 1) throw DomainError("search_divisible: n must be >= 1");
  if (!settings.base.empty() && static_cast<int>(settings.base.size()) != r)
    throw DomainError("search_divisible: base tuple must have r rotations");

  SearchRun run;
  run.d = d;
  run.r = r;
  run.n = n;
  run.settings = settings;
  auto basis = std::make_shared<const ZonalBasis>(ZonalBasis::build(d, n, rng));
  const std::size_t dim = static_cast<std::size_t>((r - 1) * d * (d - 1) / 2);

  double best_so_far = std::numeric_limits<double>::infinity();
  auto record = [&](double v) {
    best_so_far = std::min(best_so_far, v);
    run.trace.push_back(best_so_far);
  };

  for (int restart = 0; restart < settings.restarts; ++restart) {
    Rng restart_rng(derive_seed(rng.next(), static_cast<std::uint64_t>(restart)));
    std::vector<Rotation> base;
    if (!settings.base.empty()) {
      base = settings.base;
      if (restart > 0 && settings.base_jitter > 0)
        for (std::size_t s = 1; s < base.size(); ++s) {
          std::vector<double> p(static_cast<std::size_t>(d * (d - 1) / 2));
          for (double& x : p) x = settings.base_jitter * restart_rng.normal();
          base[s] = cayley(skew_from_params(d, p)) * base[s];
        }
    } else {
      for (int s = 0; s < r; ++s) base.push_back(haar_sample(d, restart_rng));
    }

    double step = settings.initial_step;
    for (int round = 0; round < settings.recenter_rounds; ++round) {
      auto objective = [&](const std::vector<double>& p) {
        const double v = relative_sigma_min(operator_singular_values(*basis, detail::chart_tuple(base, p)), r);
        if (v < 0) throw InternalInconsistency("search_divisible: negative singular value ratio");
        return v;
      };
      NelderMeadOptions nm;
      nm.initial_step = step;
      nm.max_evaluations = settings.evaluations_per_round;
      nm.f_target = settings.target * 1e-3;
      const NelderMeadResult res = nelder_mead(objective, std::vector<double>(dim, 0.0), nm, record);
      run.evaluations += res.evaluations;
      const RotationTuple found = detail::chart_tuple(base, res.x);
      base = found.rotations();
      if (res.value < run.best_ratio) {
        run.best_ratio = res.value;
        run.best_tuple = found;
      }
      if (res.value <= nm.f_target) break;
      step *= settings.step_decay;
    }
    if (run.best_ratio <= settings.target * 1e-3) break;
  }

  if (run.best_tuple && run.best_ratio < settings.target) {
    Rng verify_rng(derive_seed(rng.next(), 0xCE57));
    KernelWitness w = kernel_witness(basis, *run.best_tuple, settings.target, verify_rng, settings.witness_samples);
    const DivisorFunction f = make_divisor(w.g, r);
    run.witness_residual_sup = w.residual_sup;
    run.verification = verify_divisor(*run.best_tuple, f, settings.verify_samples, verify_rng);
    run.certified = w.contract_ok && run.verification->passed;
  }
  return run;
}

}  // namespace fracdiv
