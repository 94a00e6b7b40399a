#pragma once

// JSON and CSV representations.
//
//   Rotation       {"d": int, "rows": [[...], ...]}
//   RotationTuple  [Rotation, ...]
//   report         see schemas/divisibility_report.schema.json

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracdiv/constructions.hpp"
#include "fracdiv/divisibility.hpp"
#include "fracdiv/errors.hpp"
#include "fracdiv/experiments.hpp"
#include "fracdiv/rotations.hpp"
#include "fracdiv/version.hpp"

namespace fracdiv {

using json = nlohmann::json;

inline json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline json matrix_rows_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

inline json to_json(const Rotation& g) { return {{"d", g.d()}, {"rows", matrix_rows_to_json(g.matrix())}}; }

inline json to_json(const RotationTuple& t) {
  json arr = json::array();
  for (const Rotation& g : t) arr.push_back(to_json(g));
  return arr;
}

inline Rotation rotation_from_json(const json& j, const std::string& where = "rotation", bool* repaired = nullptr) {
  if (!j.is_object()) throw InputError(where + ": expected an object {\"d\", \"rows\"}");
  if (!j.contains("d") || !j["d"].is_number_integer()) throw InputError(where + ": missing integer field \"d\"");
  if (!j.contains("rows") || !j["rows"].is_array()) throw InputError(where + ": missing array field \"rows\"");
  const int d = j["d"].get<int>();
  if (d < 2) throw InputError(where + ": d must be >= 2");
  const json& rows = j["rows"];
  if (rows.size() != static_cast<std::size_t>(d))
    throw InputError(where + ": \"rows\" has " + std::to_string(rows.size()) + " rows, expected d = " + std::to_string(d));
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d))
      throw InputError(where + ": row " + std::to_string(i) + " must hold " + std::to_string(d) + " numbers");
    for (int k = 0; k < d; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number())
        throw InputError(where + ": entry (" + std::to_string(i) + ", " + std::to_string(k) + ") is not a number");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  try {
    return Rotation::from_matrix(m, repaired);
  } catch (const InvalidRotation& e) {
    throw InvalidRotation(where + ": " + e.what());
  }
}

inline std::vector<Rotation> rotations_from_json(const json& j, int* repaired_count = nullptr) {
  if (!j.is_array()) throw InputError("rotation tuple: expected a JSON array of rotations");
  std::vector<Rotation> out;
  int repaired = 0;
  for (std::size_t s = 0; s < j.size(); ++s) {
    bool fixed = false;
    out.push_back(rotation_from_json(j[s], "rotation[" + std::to_string(s) + "]", &fixed));
    repaired += fixed;
  }
  if (repaired_count) *repaired_count = repaired;
  return out;
}

inline RotationTuple tuple_from_json(const json& j, int* repaired_count = nullptr) {
  return RotationTuple(rotations_from_json(j, repaired_count));
}

/// Parses JSON text; syntax errors carry nlohmann's line/column position.
inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

inline json to_json(const VerificationResult& v) {
  return {{"samples", v.samples},         {"skipped", v.skipped},   {"residual_max", v.max_residual},
          {"residual_mean", v.mean_residual}, {"variance", v.variance}, {"passed", v.passed}};
}

inline json to_json(const DegreeRecord& rec) {
  return {{"n", rec.n},
          {"N_n", rec.N_n},
          {"sigma_min_rel", rec.sigma_min_rel},
          {"sigma_min", rec.sigma_min},
          {"sigma_max", rec.sigma_max},
          {"verdict", to_string(rec.verdict)},
          {"bases_tried", rec.bases_tried}};
}

inline json to_json(const DivisibilityReport& report) {
  json j{{"d", report.d},
         {"r", report.r},
         {"n_max", report.n_max},
         {"degrees", json::array()},
         {"overall", report.overall()},
         {"divisible", report.divisible},
         {"seed", report.options.seed},
         {"sing_tol", report.options.sing_tol},
         {"cond_threshold", report.options.cond_threshold},
         {"version", kVersion}};
  for (const auto& rec : report.degrees) j["degrees"].push_back(to_json(rec));
  if (report.certificate) {
    const Certificate& c = *report.certificate;
    j["witness"] = {{"n", c.n},
                    {"poles", matrix_rows_to_json(c.poles.transpose())},
                    {"coeffs", vector_to_json(c.coeffs)},
                    {"residual_sup", c.witness_residual_sup}};
    j["divisor_scale"] = c.divisor_scale;
    j["residual_max"] = c.verification.max_residual;
    j["verification"] = to_json(c.verification);
  }
  return j;
}

inline json to_json(const GenericitySummary& s) {
  return {{"trials", s.trials},          {"completed", s.completed},     {"failed", s.failed},
          {"failure_rate", s.failure_rate()}, {"singular", s.singular},   {"ratio_min", s.ratio_min},
          {"ratio_q1", s.ratio_q1},      {"ratio_median", s.ratio_median}, {"ratio_q3", s.ratio_q3},
          {"ratio_max", s.ratio_max},    {"sigma_min", s.sigma_min}};
}

inline json to_json(const GenericityResult& result) {
  const GenericityStudy& st = result.study;
  json suffix = json::array();
  for (const Rotation& g : st.suffix) suffix.push_back(to_json(g));
  return {{"kind", "genericity"},
          {"d", st.d},
          {"r", st.r},
          {"ell", st.ell},
          {"suffix", suffix},
          {"trials", st.trials},
          {"n_max", st.n_max},
          {"seed", st.seed},
          {"sing_tol", st.sing_tol},
          {"sampling", st.sampling == FreeSampling::Haar ? "haar" : "copy"},
          {"summary", to_json(result.summary)},
          {"version", kVersion}};
}

inline json to_json(const SearchRun& run) {
  json j{{"kind", "search"},
         {"d", run.d},
         {"r", run.r},
         {"n", run.n},
         {"restarts", run.settings.restarts},
         {"evaluations_per_round", run.settings.evaluations_per_round},
         {"recenter_rounds", run.settings.recenter_rounds},
         {"initial_step", run.settings.initial_step},
         {"target", run.settings.target},
         {"evaluations", run.evaluations},
         {"best_ratio", run.best_ratio},
         {"certified", run.certified},
         {"version", kVersion}};
  if (run.best_tuple) j["best_tuple"] = to_json(*run.best_tuple);
  if (run.verification) {
    j["verification"] = to_json(*run.verification);
    j["residual_max"] = run.verification->max_residual;
    j["witness_residual_sup"] = run.witness_residual_sup;
  }
  return j;
}

// Shortest decimal form that round-trips a double.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return os.str();
}

/// trial,n,sigma_min_rel,verdict  -- one row per (trial, degree); failed
/// trials get a single row with n = 0 and verdict "failed".
inline void write_trial_csv(std::ostream& out, const GenericityResult& result) {
  out << "trial,n,sigma_min_rel,verdict\n";
  for (const TrialResult& t : result.trials) {
    if (t.failed) {
      out << t.trial << ",0,nan,failed\n";
      continue;
    }
    for (const DegreeRecord& rec : t.degrees)
      out << t.trial << ',' << rec.n << ',' << format_real(rec.sigma_min_rel) << ',' << to_string(rec.verdict) << '\n';
  }
}

/// evaluation,best_ratio
inline void write_trace_csv(std::ostream& out, const SearchRun& run) {
  out << "evaluation,best_ratio\n";
  for (std::size_t k = 0; k < run.trace.size(); ++k) out << k + 1 << ',' << format_real(run.trace[k]) << '\n';
}

}  // namespace fracdiv
