#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fracdiv/cli.hpp"

using namespace fracdiv;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fracdiv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fracdiv_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST(Json, TupleRoundTrip) {
  Rng rng(60);
  const RotationTuple t{haar_sample(4, rng), haar_sample(4, rng), haar_sample(4, rng)};
  const json j = json::parse(to_json(t).dump());
  int repaired = -1;
  const RotationTuple back = tuple_from_json(j, &repaired);
  EXPECT_EQ(repaired, 0);
  ASSERT_EQ(back.r(), 3);
  for (int s = 0; s < 3; ++s) EXPECT_EQ(back[s].matrix(), t[s].matrix());
}

TEST(Json, RejectsMalformedRotations) {
  const json reflection = json::parse(R"([{"d": 2, "rows": [[1, 0], [0, -1]]}, {"d": 2, "rows": [[1, 0], [0, 1]]}])");
  try {
    tuple_from_json(reflection);
    FAIL();
  } catch (const InvalidRotation& e) {
    EXPECT_NE(std::string(e.what()).find("determinant"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("rotation[0]"), std::string::npos);
  }
  EXPECT_THROW(tuple_from_json(json::parse(R"([{"d": 2, "rows": [[1, 0]]}])")), InputError);
  EXPECT_THROW(tuple_from_json(json::parse(R"([{"d": 2, "rows": [[1, 0], [0, "x"]]}])")), InputError);
  EXPECT_THROW(tuple_from_json(json::parse(R"({"d": 2})")), InputError);
  EXPECT_THROW(parse_json_text("[1, 2", "inline"), InputError);
}

TEST(Json, SlightlyNonOrthogonalIsRepaired) {
  const json j = json::parse(R"([{"d": 2, "rows": [[1.00001, 0], [0, 1]]}, {"d": 2, "rows": [[-1, 0], [0, -1]]}])");
  int repaired = 0;
  const RotationTuple t = tuple_from_json(j, &repaired);
  EXPECT_EQ(repaired, 1);
  EXPECT_LE(orthogonality_error(t[0].matrix()), 1e-12);
}

TEST(Json, ReportFields) {
  const RotationTuple t{planar_rotation(2, 1, 2, 0.0), planar_rotation(2, 1, 2, std::numbers::pi)};
  DivisibilityOptions opts;
  opts.seed = 3;
  const json j = to_json(divisibility_test(t, 2, opts));
  EXPECT_EQ(j["overall"], kOverallDivisible);
  EXPECT_EQ(j["seed"], 3u);
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_EQ(j["witness"]["n"], 1);
  EXPECT_LE(j["residual_max"].get<double>(), 1e-8);
  EXPECT_EQ(j["degrees"].size(), 2u);
}

TEST(Cli, TestSubcommand) {
  const fs::path ident = scratch("ident.json"), zero_pi = scratch("zero_pi.json"), bad = scratch("bad.json");
  write_file(ident, R"([{"d": 3, "rows": [[1,0,0],[0,1,0],[0,0,1]]}, {"d": 3, "rows": [[1,0,0],[0,1,0],[0,0,1]]}])");
  write_file(zero_pi, R"([{"d": 2, "rows": [[1,0],[0,1]]}, {"d": 2, "rows": [[-1,0],[0,-1]]}])");
  write_file(bad, R"([{"d": 2, "rows": [[1,0],[0,-1]]}, {"d": 2, "rows": [[1,0],[0,1]]}])");

  auto r1 = run_cli({"test", "--input", ident.string(), "--n-max", "3", "--seed", "1"});
  ASSERT_EQ(r1.code, 0) << r1.err;
  EXPECT_EQ(json::parse(r1.out)["overall"], kOverallNoWitness);

  auto r2 = run_cli({"test", "--input", zero_pi.string(), "--n-max", "2", "--seed", "1"});
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(json::parse(r2.out)["overall"], kOverallDivisible);
  EXPECT_EQ(json::parse(r2.out)["witness"]["n"], 1);

  auto r3 = run_cli({"test", "--input", bad.string()});
  EXPECT_EQ(r3.code, 2);
  EXPECT_NE(r3.err.find("determinant"), std::string::npos);

  EXPECT_EQ(run_cli({"test", "--input", scratch("missing.json").string()}).code, 2);
  EXPECT_EQ(run_cli({"test"}).code, 2);
}

TEST(Cli, SeedIsPrintedWhenDerived) {
  const fs::path zero_pi = scratch("zero_pi2.json");
  write_file(zero_pi, R"([{"d": 2, "rows": [[1,0],[0,1]]}, {"d": 2, "rows": [[-1,0],[0,-1]]}])");
  auto r = run_cli({"test", "--input", zero_pi.string(), "--n-max", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("seed: "), std::string::npos);
}

TEST(Cli, Construct) {
  auto planar = run_cli({"construct", "planar", "--d", "3", "--r", "3", "--samples", "2000", "--seed", "2"});
  ASSERT_EQ(planar.code, 0) << planar.err;
  EXPECT_EQ(json::parse(planar.out)["residual_max"], 0.0);

  auto odd = run_cli({"construct", "odd-d4", "--d", "5", "--seed", "4", "--samples", "2000"});
  ASSERT_EQ(odd.code, 0) << odd.err;
  EXPECT_LE(json::parse(odd.out)["witness_residual_sup"].get<double>(), 1e-10);

  auto d2 = run_cli({"construct", "d2-analyze", "--n", "1", "--angles", "3.141592653589793"});
  ASSERT_EQ(d2.code, 0) << d2.err;
  const json bad = json::parse(d2.out)["bad_angles"];
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_NEAR(bad[0].get<double>(), 0.0, 1e-9);

  EXPECT_EQ(run_cli({"construct", "d2-analyze", "--n", "1", "--k", "1,0,0,-1"}).code, 3);
  EXPECT_EQ(run_cli({"construct", "odd-d4", "--d", "4"}).code, 2);
  EXPECT_NE(run_cli({"construct", "nonsense"}).code, 0);
}

TEST(Cli, ExperimentCsvIsDeterministic) {
  const fs::path cfg = scratch("gen.json");
  write_file(cfg, R"({"kind": "genericity", "d": 3, "r": 3, "ell": 1, "trials": 4, "n_max": 2})");
  auto a = run_cli({"experiment", "--input", cfg.string(), "--seed", "8", "--format", "csv"});
  auto b = run_cli({"experiment", "--input", cfg.string(), "--seed", "8", "--format", "csv"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("trial,n,sigma_min_rel,verdict\n", 0), 0u);

  const fs::path prefix = scratch("gen_out");
  auto c = run_cli({"experiment", "--input", cfg.string(), "--seed", "8", "--out", prefix.string()});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_TRUE(fs::exists(prefix.string() + ".json"));
  EXPECT_TRUE(fs::exists(prefix.string() + ".csv"));
  const json summary = read_json_file(prefix.string() + ".json");
  EXPECT_EQ(summary["summary"]["singular"], 0);

  write_file(cfg, R"({"kind": "bogus"})");
  EXPECT_EQ(run_cli({"experiment", "--input", cfg.string(), "--seed", "1"}).code, 2);
}
