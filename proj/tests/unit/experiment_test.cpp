#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brightside/error.hpp"
#include "brightside/experiment.hpp"

using namespace brightside;
using namespace brightside::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "brightside_experiment_test" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("preset names and defaults") {
  for (auto p : {Preset::Cauchy, Preset::SkewT, Preset::Logistic, Preset::Robit, Preset::Custom})
    CHECK(parse_preset(to_string(p)) == p);
  CHECK_THROWS_AS(parse_preset("nope"), Error);
  const auto c = preset_defaults(Preset::Cauchy);
  CHECK(c.dimension == 10);
  CHECK(c.iterations == 100000);
  CHECK(c.ell_o == 1.1);
  CHECK(c.init_value == 1e3);
  CHECK(preset_defaults(Preset::Cauchy, true).dimension == 100);
  CHECK(preset_defaults(Preset::SkewT).reference_draws == 1000000);
  CHECK(preset_defaults(Preset::SkewT, true).reference_draws == 10000000);
  const auto r = preset_defaults(Preset::Logistic);
  CHECK(r.dimension == 5);
  CHECK(r.observations == 30);
  const auto rp = preset_defaults(Preset::Robit, true);
  CHECK(rp.dimension == 20);
  CHECK(rp.observations == 50);
  CHECK(rp.iterations == 5000000);
  for (auto p : {Preset::Cauchy, Preset::SkewT, Preset::Logistic, Preset::Robit, Preset::Custom}) {
    CHECK_NOTHROW(validate(preset_defaults(p)));
    CHECK_NOTHROW(validate(preset_defaults(p, true)));
  }
}

TEST_CASE("config JSON round trip and rejection of bad overrides") {
  auto c = preset_defaults(Preset::Robit);
  c.seed = 77;
  c.kernel = kernels::KernelKind::HMC;
  c.link = targets::Link::Robit;
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));

  CHECK(code_of([] { config_from_json(io::Json{{"bogus", 1}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json(io::Json{{"iterations", "many"}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json(io::Json{{"iterations", -5}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json(io::Json{{"kernel", "NUTS"}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json(io::Json::array()); }) == ErrorCode::ConfigError);

  auto bad = preset_defaults(Preset::Cauchy);
  bad.burnin = bad.iterations;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::ConfigError);
  bad = preset_defaults(Preset::Cauchy);
  bad.ell_o = 2.5;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::ConfigError);
  bad.ell_o = 2.0;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::ConfigError);
  bad.tune = false;
  CHECK_NOTHROW(validate(bad));
  bad = preset_defaults(Preset::Custom);
  bad.data_csv = "/definitely/not/here.csv";
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::ConfigError);
  bad = preset_defaults(Preset::Cauchy);
  bad.thinning = 0;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::ConfigError);
}

TEST_CASE("problems built from presets") {
  const auto sk = build_problem(preset_defaults(Preset::SkewT));
  CHECK(sk.target->dim() == 10);
  REQUIRE(sk.skew);
  CHECK(sk.skew->alpha_skew[0] == 100);
  CHECK(sk.skew->alpha_skew[1] == -100);
  CHECK(sk.init == Vector(10, 1.0));
  auto cfg = preset_defaults(Preset::SkewT);
  cfg.xi_spread = 10;
  const auto sk2 = build_problem(cfg);
  CHECK(sk2.skew->xi.front() == -10);
  CHECK(sk2.skew->xi.back() == 10);

  const auto lg = build_problem(preset_defaults(Preset::Logistic));
  REQUIRE(lg.data);
  CHECK(lg.data->n == 30);
  CHECK(lg.data->link == targets::Link::Logit);
  CHECK(build_problem(preset_defaults(Preset::Robit)).data->link == targets::Link::Robit);
}

TEST_CASE("sample writes re-readable, deterministic artifacts") {
  auto c = preset_defaults(Preset::Cauchy);
  c.dimension = 2;
  c.iterations = 3000;
  c.burnin = 500;
  c.tune_steps = 50;
  c.tune_batch = 100;
  c.output_dir = scratch("sample_a");
  const auto a = run_sample(c);
  CHECK(a.chain.n_kept == 2500);
  const auto table = io::read_samples_csv(c.run_dir() / "samples.csv");
  CHECK(table.rows() == 2500);
  CHECK(table.values == a.chain.samples);
  const auto report = io::read_json(c.run_dir() / "report.json");
  CHECK(report["ess"].size() == 2);
  CHECK(io::tune_report_from_json(io::read_json(c.run_dir() / "tune.json")).objective_trace.size() == 50);

  auto c2 = c;
  c2.output_dir = scratch("sample_b");
  run_sample(c2);
  CHECK(slurp(c.run_dir() / "samples.csv") == slurp(c2.run_dir() / "samples.csv"));
}

TEST_CASE("experiment summary validates and Q-Q tables round trip") {
  auto c = preset_defaults(Preset::Logistic);
  c.iterations = 4000;
  c.burnin = 500;
  c.replicates = 2;
  c.tune_steps = 50;
  c.output_dir = scratch("exp");
  const auto r = run_experiment(c);
  CHECK(validate_summary(r.summary).empty());
  CHECK_FALSE(r.mandatory_failed);
  CHECK(r.summary["methods"].size() == 3);
  CHECK(r.summary["reference"]["kind"] == "reference_chain");
  CHECK(r.summary["reference"].contains("agreement"));
  const auto summary_file = io::read_json(c.run_dir() / "summary.json");
  CHECK(summary_file == r.summary);
  for (const auto& m : r.summary["methods"]) {
    const auto qq = io::read_qq_csv(c.run_dir() / m["qq_csv"].get<std::string>());
    CHECK(qq.size() == 4);
    CHECK(qq[0].probs.size() == 11);
  }
  const auto data = io::read_regression_csv(c.run_dir() / "data.csv");
  CHECK(data.n == 30);

  io::Json broken = r.summary;
  broken.erase("methods");
  CHECK_FALSE(validate_summary(broken).empty());
  broken = r.summary;
  broken["status"] = "great";
  CHECK_FALSE(validate_summary(broken).empty());
}

TEST_CASE("presets write to separate directories") {
  auto a = preset_defaults(Preset::Logistic), b = preset_defaults(Preset::Robit);
  a.output_dir = b.output_dir = "root";
  CHECK(a.run_dir() != b.run_dir());
}

TEST_CASE("worker pool") {
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) throw Error(ErrorCode::TargetFailure, "x");
                  }),
                  Error);
  setenv("BRIGHTSIDE_THREADS", "1", 1);
  CHECK(worker_count(50) == 1);
  unsetenv("BRIGHTSIDE_THREADS");
  CHECK(worker_count(1) == 1);
}
