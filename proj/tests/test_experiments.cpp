#include <gtest/gtest.h>

#include <numbers>

#include "fracdiv/constructions.hpp"
#include "fracdiv/experiments.hpp"

using namespace fracdiv;

TEST(Genericity, OddSuffixIsAlwaysSingular) {
  GenericityStudy study;
  study.d = 3;
  study.r = 4;
  study.ell = 1;
  study.suffix = odd_d4_suffix(3);
  study.trials = 20;
  study.n_max = 1;
  study.seed = 5;
  const GenericityResult res = run_genericity(study);
  EXPECT_EQ(res.summary.singular, 20);
  EXPECT_EQ(res.summary.failed, 0);
  for (const TrialResult& t : res.trials) {
    EXPECT_EQ(t.singular_n, 1);
    EXPECT_LE(t.residual_max, 1e-8);
  }
}

TEST(Genericity, HaarSuffixHasNoSingularTrials) {
  Rng rng(50);
  GenericityStudy study;
  study.d = 3;
  study.r = 3;
  study.ell = 1;
  study.suffix = {haar_sample(3, rng), haar_sample(3, rng)};
  study.trials = 40;
  study.n_max = 4;
  study.seed = 6;
  const GenericityResult res = run_genericity(study);
  EXPECT_EQ(res.summary.singular, 0);
  EXPECT_EQ(res.summary.completed, 40);
  EXPECT_GT(res.summary.ratio_min, 1e-6);
  EXPECT_LE(res.summary.ratio_min, res.summary.ratio_q1);
  EXPECT_LE(res.summary.ratio_q1, res.summary.ratio_median);
  EXPECT_LE(res.summary.ratio_median, res.summary.ratio_q3);
  EXPECT_LE(res.summary.ratio_q3, res.summary.ratio_max);
}

TEST(Genericity, CopySamplingRespectsTriangleBound) {
  Rng rng(51);
  GenericityStudy study;
  study.d = 3;
  study.r = 2;
  study.ell = 1;
  study.suffix = {haar_sample(3, rng)};
  study.sampling = FreeSampling::CopyFirstFixed;
  study.trials = 1;
  study.n_max = 4;
  const GenericityResult res = run_genericity(study);
  EXPECT_GE(res.trials[0].min_sigma, 2.0 - 1e-6);
}

TEST(Genericity, DeterministicAcrossThreadCounts) {
  Rng rng(52);
  GenericityStudy study;
  study.d = 3;
  study.r = 3;
  study.ell = 1;
  study.suffix = {haar_sample(3, rng), haar_sample(3, rng)};
  study.trials = 6;
  study.n_max = 2;
  study.seed = 9;
  const auto a = run_genericity(study);
  study.threads = 3;
  const auto b = run_genericity(study);
  for (int k = 0; k < study.trials; ++k) EXPECT_EQ(a.trials[k].min_ratio, b.trials[k].min_ratio);
  EXPECT_EQ(a.summary.ratio_median, b.summary.ratio_median);
}

TEST(Genericity, Validation) {
  GenericityStudy study;
  study.suffix = {};
  EXPECT_THROW(run_genericity(study), DomainError);
  study.trials = 0;
  EXPECT_THROW(study.validate(), DomainError);
  EXPECT_EQ(default_free_count(3, 5), 2);
  EXPECT_EQ(default_free_count(2, 5), 1);
}

TEST(Quantile, Interpolates) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
}

TEST(NelderMead, MinimizesQuadratic) {
  NelderMeadOptions opts;
  opts.initial_step = 0.5;
  opts.max_evaluations = 2000;
  const auto res = nelder_mead([](const std::vector<double>& p) { return (p[0] - 1) * (p[0] - 1) + 4 * (p[1] + 2) * (p[1] + 2); },
                               {0.0, 0.0}, opts);
  EXPECT_NEAR(res.x[0], 1.0, 1e-5);
  EXPECT_NEAR(res.x[1], -2.0, 1e-5);
}

TEST(Search, PlanarPairCertified) {
  Rng rng(53);
  SearchSettings settings;
  settings.base = {planar_rotation(2, 1, 2, 0.0), planar_rotation(2, 1, 2, std::numbers::pi + 0.2)};
  settings.restarts = 2;
  const SearchRun run = search_divisible(2, 2, 1, settings, rng);
  EXPECT_LT(run.best_ratio, 1e-10);
  EXPECT_TRUE(run.certified);
  ASSERT_TRUE(run.verification);
  EXPECT_LE(run.verification->max_residual, 1e-8);
  for (std::size_t k = 1; k < run.trace.size(); ++k) EXPECT_LE(run.trace[k], run.trace[k - 1]);
  for (double v : run.trace) EXPECT_GE(v, 0.0);
}

TEST(Search, OddFourTupleReachable) {
  Rng rng(54);
  SearchSettings settings;
  settings.restarts = 6;
  const SearchRun run = search_divisible(3, 4, 1, settings, rng);
  EXPECT_LT(run.best_ratio, 1e-10);
  EXPECT_TRUE(run.certified);
  ASSERT_TRUE(run.best_tuple);
  for (const Rotation& g : *run.best_tuple) EXPECT_LE(orthogonality_error(g.matrix()), 1e-9);
}

TEST(Search, Deterministic) {
  SearchSettings settings;
  settings.restarts = 1;
  settings.evaluations_per_round = 200;
  settings.recenter_rounds = 2;
  Rng a(55), b(55);
  const SearchRun x = search_divisible(3, 3, 2, settings, a);
  const SearchRun y = search_divisible(3, 3, 2, settings, b);
  EXPECT_EQ(x.trace, y.trace);
  EXPECT_EQ(x.best_ratio, y.best_ratio);
  EXPECT_FALSE(x.certified && x.best_ratio >= settings.target);
}
