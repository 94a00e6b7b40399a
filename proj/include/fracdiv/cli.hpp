#pragma once

// Command-line front end:
//   fracdiv test       --input tuple.json [--n-max 8] [--sing-tol 1e-10] [--seed S] [--out report.json]
//   fracdiv construct  planar|odd-d4|d2-analyze [--d D] [--r R] [--n N] [--angles a,b,..] [--seed S] [--out f]
//   fracdiv experiment --input config.json [--seed S] [--trials T] [--out prefix]
// Exit status: 0 success, 1 runtime failure, 2 invalid input, 3 internal inconsistency.

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracdiv/constructions.hpp"
#include "fracdiv/divisibility.hpp"
#include "fracdiv/experiments.hpp"
#include "fracdiv/io.hpp"
#include "fracdiv/version.hpp"

namespace fracdiv::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kInputError = 2, kInconsistency = 3 };

struct CliConfig {
  std::string subcommand;
  std::string kind;  // construct kind
  std::string input;
  std::string out;
  std::string format = "json";
  int d = 3;
  int r = 3;
  int n = 1;
  int n_max = 8;
  std::optional<std::uint64_t> seed;
  double sing_tol = kDefaultSingTol;
  std::optional<int> trials;
  int samples = 100000;
  std::vector<double> angles;
  std::vector<double> k_entries;
};

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& log) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  log << "seed: " << s << " (derived; pass --seed " << s << " to reproduce)\n";
  return s;
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

inline std::string degrees_csv(const DivisibilityReport& report) {
  std::ostringstream os;
  os << "n,N_n,sigma_min_rel,verdict\n";
  for (const auto& rec : report.degrees)
    os << rec.n << ',' << rec.N_n << ',' << format_real(rec.sigma_min_rel) << ',' << to_string(rec.verdict) << '\n';
  return os.str();
}

inline int cmd_test(const CliConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.input.empty()) throw InputError("test: --input is required");
  int repaired = 0;
  const RotationTuple tuple = tuple_from_json(read_json_file(cfg.input), &repaired);
  if (repaired) log << "warning: " << repaired << " rotation(s) repaired to the nearest orthogonal matrix\n";
  DivisibilityOptions opts;
  opts.sing_tol = cfg.sing_tol;
  opts.seed = resolve_seed(cfg.seed, log);
  const DivisibilityReport report = divisibility_test(tuple, cfg.n_max, opts);
  json j = to_json(report);
  j["repaired_rotations"] = repaired;
  emit(cfg.format == "csv" ? degrees_csv(report) : j.dump(2) + "\n", cfg.out, out);
  log << "overall: " << report.overall() << '\n';
  return kSuccess;
}

inline json construct_planar(const CliConfig& cfg, std::uint64_t seed) {
  const PlanarDivision pd = planar_division(cfg.d, cfg.r);
  Rng rng(seed);
  const VerificationResult v = verify_divisor(pd.tuple, pd.indicator_function(), cfg.samples, rng, pd.boundary_predicate());
  return {{"kind", "planar"},
          {"d", cfg.d},
          {"r", cfg.r},
          {"tuple", to_json(pd.tuple)},
          {"indicator",
           {{"type", "angular_sector"}, {"plane", {1, 2}}, {"start", 0.0}, {"width", pd.sector_width()}}},
          {"verification", to_json(v)},
          {"residual_max", v.max_residual},
          {"seed", seed},
          {"version", kVersion}};
}

inline json construct_odd_d4(const CliConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Rotation first = cfg.input.empty() ? haar_sample(cfg.d, rng) : rotation_from_json(read_json_file(cfg.input), cfg.input);
  const OddD4Construction c = odd_d4_tuple(cfg.d, first);
  const int samples = std::min(cfg.samples, 10000);
  const double witness_sup = witness_residual(c.witness, c.tuple, samples, rng);
  const DivisorFunction f = make_divisor(c.witness, 4);
  const VerificationResult v = verify_divisor(c.tuple, f, samples, rng);
  return {{"kind", "odd-d4"},
          {"d", cfg.d},
          {"r", 4},
          {"tuple", to_json(c.tuple)},
          {"witness", {{"n", 1}, {"type", "linear"}, {"pole", vector_to_json(c.pole)}}},
          {"witness_residual_sup", witness_sup},
          {"divisor_scale", f.scale()},
          {"verification", to_json(v)},
          {"residual_max", v.max_residual},
          {"seed", seed},
          {"version", kVersion}};
}

inline json construct_d2(const CliConfig& cfg) {
  Eigen::Matrix2d k;
  std::vector<double> angles = cfg.angles;
  if (!cfg.k_entries.empty()) {
    if (cfg.k_entries.size() != 4) throw InputError("d2-analyze: --k takes 4 entries K11,K12,K21,K22");
    k << cfg.k_entries[0], cfg.k_entries[1], cfg.k_entries[2], cfg.k_entries[3];
  } else {
    if (angles.empty()) throw InputError("d2-analyze: --angles (fixed rotation angles) or --k is required");
    k = d2_K_matrix(cfg.n, angles);
  }
  const std::vector<double> bad = d2_bad_angles_for_K(cfg.n, k);
  return {{"kind", "d2-analyze"},
          {"n", cfg.n},
          {"angles", angles},
          {"K", matrix_rows_to_json(k)},
          {"bad_angles", bad},
          {"version", kVersion}};
}

inline int cmd_construct(const CliConfig& cfg, std::ostream& out, std::ostream& log) {
  json j;
  if (cfg.kind == "planar") {
    j = construct_planar(cfg, resolve_seed(cfg.seed, log));
  } else if (cfg.kind == "odd-d4") {
    j = construct_odd_d4(cfg, resolve_seed(cfg.seed, log));
  } else if (cfg.kind == "d2-analyze") {
    j = construct_d2(cfg);
  } else {
    throw InputError("construct: unknown kind '" + cfg.kind + "' (expected planar, odd-d4, d2-analyze)");
  }
  emit(j.dump(2) + "\n", cfg.out, out);
  return kSuccess;
}

namespace detail {

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

inline std::vector<Rotation> suffix_from_config(const json& cfg, int d, int count, Rng& rng) {
  if (!cfg.contains("suffix") || cfg["suffix"] == "haar") {
    std::vector<Rotation> out;
    for (int s = 0; s < count; ++s) out.push_back(haar_sample(d, rng));
    return out;
  }
  if (cfg["suffix"] == "odd-d4") {
    if (count != 3) throw InputError("config: suffix \"odd-d4\" needs r - ell = 3");
    return odd_d4_suffix(d);
  }
  if (cfg["suffix"].is_array()) return rotations_from_json(cfg["suffix"]);
  throw InputError("config: \"suffix\" must be \"haar\", \"odd-d4\" or an array of rotations");
}

}  // namespace detail

inline int cmd_experiment(const CliConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.input.empty()) throw InputError("experiment: --input config.json is required");
  const json conf = read_json_file(cfg.input);
  if (!conf.is_object()) throw InputError(cfg.input + ": config must be a JSON object");
  const std::string kind = detail::field<std::string>(conf, "kind", "genericity");
  std::optional<std::uint64_t> seed = cfg.seed;
  if (!seed && conf.contains("seed")) seed = detail::field<std::uint64_t>(conf, "seed", 0);
  const std::uint64_t resolved = resolve_seed(seed, log);

  std::string summary, table;
  if (kind == "genericity") {
    GenericityStudy st;
    st.d = detail::field<int>(conf, "d", 3);
    st.r = detail::field<int>(conf, "r", 3);
    st.ell = detail::field<int>(conf, "ell", default_free_count(st.d, st.r));
    st.trials = cfg.trials.value_or(detail::field<int>(conf, "trials", 100));
    st.n_max = detail::field<int>(conf, "n_max", 5);
    st.sing_tol = detail::field<double>(conf, "sing_tol", kDefaultSingTol);
    st.threads = detail::field<int>(conf, "threads", 1);
    const std::string sampling = detail::field<std::string>(conf, "sampling", "haar");
    if (sampling != "haar" && sampling != "copy") throw InputError("config: \"sampling\" must be \"haar\" or \"copy\"");
    st.sampling = sampling == "haar" ? FreeSampling::Haar : FreeSampling::CopyFirstFixed;
    st.seed = resolved;
    Rng suffix_rng(derive_seed(resolved, 0x5FF1Cu));
    st.suffix = detail::suffix_from_config(conf, st.d, st.r - st.ell, suffix_rng);
    const GenericityResult result = run_genericity(st);
    summary = to_json(result).dump(2) + "\n";
    std::ostringstream csv;
    write_trial_csv(csv, result);
    table = csv.str();
    log << "singular trials: " << result.summary.singular << " / " << result.summary.completed << '\n';
  } else if (kind == "search") {
    const int d = detail::field<int>(conf, "d", 2);
    const int r = detail::field<int>(conf, "r", 2);
    const int n = detail::field<int>(conf, "n", 1);
    SearchSettings s;
    s.restarts = detail::field<int>(conf, "restarts", s.restarts);
    s.evaluations_per_round = detail::field<int>(conf, "evaluations_per_round", s.evaluations_per_round);
    s.recenter_rounds = detail::field<int>(conf, "recenter_rounds", s.recenter_rounds);
    s.initial_step = detail::field<double>(conf, "initial_step", s.initial_step);
    s.target = detail::field<double>(conf, "target", s.target);
    s.base_jitter = detail::field<double>(conf, "base_jitter", s.base_jitter);
    if (conf.contains("base")) s.base = rotations_from_json(conf["base"]);
    if (conf.contains("base_angles")) {
      if (d != 2) throw InputError("config: \"base_angles\" is only meaningful for d = 2");
      for (double a : detail::field<std::vector<double>>(conf, "base_angles", {})) s.base.push_back(planar_rotation(2, 1, 2, a));
    }
    Rng rng(resolved);
    const SearchRun run = search_divisible(d, r, n, s, rng);
    json j = to_json(run);
    j["seed"] = resolved;
    summary = j.dump(2) + "\n";
    std::ostringstream csv;
    write_trace_csv(csv, run);
    table = csv.str();
    log << "best ratio: " << run.best_ratio << (run.certified ? " (certified divisible)" : "") << '\n';
  } else {
    throw InputError("config: unknown experiment kind '" + kind + "'");
  }

  if (cfg.out.empty() || cfg.out == "-") {
    out << (cfg.format == "csv" ? table : summary);
  } else {
    emit(summary, cfg.out + ".json", out);
    emit(table, cfg.out + ".csv", out);
  }
  return kSuccess;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Fractional divisibility of spheres by tuples of rotations", "fracdiv"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  CliConfig cfg;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output path (stdout when omitted)");
    sub->add_option("--seed", seed, "64-bit seed (derived and printed when omitted)");
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* test = app.add_subcommand("test", "Run the per-degree divisibility test on a rotation tuple");
  test->add_option("--input", cfg.input, "Rotation tuple JSON")->required();
  test->add_option("--n-max", cfg.n_max, "Highest degree tested")->check(CLI::PositiveNumber);
  test->add_option("--sing-tol", cfg.sing_tol, "Relative sigma_min singularity trigger")->check(CLI::PositiveNumber);
  common(test);

  CLI::App* construct = app.add_subcommand("construct", "Emit an explicit construction");
  construct->add_option("kind", cfg.kind, "planar | odd-d4 | d2-analyze")->required();
  construct->add_option("--d", cfg.d, "Ambient dimension");
  construct->add_option("--r", cfg.r, "Tuple length");
  construct->add_option("--n", cfg.n, "Degree (d2-analyze)");
  construct->add_option("--angles", cfg.angles, "Fixed rotation angles in radians (d2-analyze)")->delimiter(',');
  construct->add_option("--k", cfg.k_entries, "Explicit K11,K12,K21,K22 (d2-analyze)")->delimiter(',');
  construct->add_option("--input", cfg.input, "gamma_1 rotation JSON (odd-d4; Haar sample when omitted)");
  construct->add_option("--samples", cfg.samples, "Verification sample count")->check(CLI::PositiveNumber);
  common(construct);

  CLI::App* experiment = app.add_subcommand("experiment", "Run a genericity study or a divisible-tuple search");
  experiment->add_option("--input", cfg.input, "Experiment config JSON")->required();
  experiment->add_option("--trials", trials, "Override the configured trial count");
  common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }
  cfg.seed = seed;
  cfg.trials = trials;
  try {
    if (test->parsed()) {
      cfg.subcommand = "test";
      return cmd_test(cfg, out, err);
    }
    if (construct->parsed()) {
      cfg.subcommand = "construct";
      return cmd_construct(cfg, out, err);
    }
    cfg.subcommand = "experiment";
    return cmd_experiment(cfg, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InternalInconsistency& e) {
    err << "internal inconsistency: " << e.what() << '\n';
    return kInconsistency;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace fracdiv::cli
