#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "brightside/error.hpp"
#include "brightside/io.hpp"

using namespace brightside;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "brightside_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("doubles print with full precision") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::format_double(M_PI)) == M_PI);
}

TEST_CASE("samples CSV round trip") {
  kernels::ChainOutput c;
  c.dim = 3;
  c.n_kept = 2;
  c.samples = {1.0 / 3.0, -1e300, 5e-324, 2.0, 3.0, -0.0};
  c.kept_iterations = {11, 12};
  const auto path = scratch("samples.csv");
  io::write_samples_csv(path, c);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,y_1,y_2,y_3");
  const auto t = io::read_samples_csv(path);
  CHECK(t.dim == 3);
  CHECK(t.iterations == c.kept_iterations);
  CHECK(t.values == c.samples);
  CHECK(t.column(1) == Vector{-1e300, 3.0});
}

TEST_CASE("regression CSV round trip") {
  Rng rng = derive_stream(1);
  const auto data = targets::generate_separable_data(12, 3, rng);
  const auto path = scratch("data.csv");
  io::write_regression_csv(path, data);
  const auto back = io::read_regression_csv(path);
  CHECK(back.n == 12);
  CHECK(back.d == 3);
  CHECK(back.X == data.X);
  CHECK(back.y == data.y);
}

TEST_CASE("malformed CSV is rejected") {
  auto expect_io_error = [](const fs::path& p, auto reader) {
    try {
      reader(p);
      FAIL("expected IoError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IoError);
    }
  };
  const auto p = scratch("bad.csv");
  { std::ofstream(p) << "x_1,x_2\n1,2\n"; }
  expect_io_error(p, io::read_regression_csv);
  { std::ofstream(p) << "x_1,y\n1,0.5\n"; }
  expect_io_error(p, io::read_regression_csv);
  { std::ofstream(p) << "iter,y_1\n1,2,3\n"; }
  expect_io_error(p, io::read_samples_csv);
  { std::ofstream(p) << "iter,y_1\n1,abc\n"; }
  expect_io_error(p, io::read_samples_csv);
  expect_io_error(scratch("missing.csv"), io::read_samples_csv);
}

TEST_CASE("Q-Q CSV and JSON round trip") {
  diagnostics::QQReport r;
  r.coordinate = 2;
  r.probs = {0.1, 0.5};
  r.sample_quantile = {-1.0, 0.1};
  r.reference_quantile = {-1.1, 0.0};
  r.relative_error = {0.1 / 1.1, 0.1};
  r.envelope_lo = {-1.2, -0.1};
  r.envelope_hi = {-0.9, 0.2};
  r.replicate_quantiles = {{-1.0, 0.1}, {-1.0, 0.2}};
  r.denominator_floor = 1.0;
  auto r2 = r;
  r2.coordinate = 3;
  const auto path = scratch("qq.csv");
  io::write_qq_csv(path, {r, r2});
  const auto back = io::read_qq_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].coordinate == 2);
  CHECK(back[1].coordinate == 3);
  CHECK(back[0].probs == r.probs);
  CHECK(back[0].sample_quantile == r.sample_quantile);
  CHECK(back[0].relative_error == r.relative_error);
  CHECK(back[0].envelope_hi == r.envelope_hi);

  const auto j = io::qq_from_json(io::to_json(r));
  CHECK(j.replicate_quantiles == r.replicate_quantiles);
  CHECK(j.reference_quantile == r.reference_quantile);
  CHECK(j.denominator_floor == 1.0);
}

TEST_CASE("tune report JSON round trip") {
  tuning::TuneReport r;
  r.theta_bar = {{0.1, -0.2}, {1.0, 2.0}, 1.5};
  r.ell_o = 1.1;
  r.objective_trace = {3.0, 2.0, std::nan("")};
  r.grad_norm_trace = {1.0, 0.5, 0.25};
  r.alignment = tuning::Alignment{-0.95, std::nan("")};
  r.cosine_trace = {0.0, -0.5, -0.95};
  const auto path = scratch("tune.json");
  io::write_json(path, io::to_json(r));
  const auto back = io::tune_report_from_json(io::read_json(path));
  CHECK(back.theta_bar.h_o == r.theta_bar.h_o);
  CHECK(back.theta_bar.mu == r.theta_bar.mu);
  CHECK(back.theta_bar.R == 1.5);
  CHECK(back.objective_trace[1] == 2.0);
  CHECK(std::isnan(back.objective_trace[2]));
  CHECK(back.alignment->cosine == -0.95);
  CHECK(std::isnan(back.alignment->relative_distance));
  CHECK(back.cosine_trace == r.cosine_trace);
  CHECK(back.distance_trace.empty());
}

TEST_CASE("projection parameters JSON round trip") {
  const geometry::ProjectionParams p{{0.1, 0.2}, 1.1, {3, 4}, 2.0};
  const auto q = io::params_from_json(io::to_json(p));
  CHECK(q.h_o == p.h_o);
  CHECK(q.mu == p.mu);
  CHECK(q.ell_o == p.ell_o);
  CHECK(q.R == p.R);
}

TEST_CASE("chain report fields") {
  const auto t = targets::standard_cauchy(2);
  kernels::KernelConfig k;
  k.kind = kernels::KernelKind::RWM;
  const auto out = kernels::run_chain(k, std::nullopt, *t, Vector{0, 0}, {200, 50, 1, 9, 0});
  const auto j = io::chain_report(out);
  CHECK(j["acceptance_rate"].get<double>() == out.acceptance_rate);
  CHECK(j["ess"].size() == 2);
  CHECK(j["seed"] == 9);
  CHECK(j["kernel"] == "rwm");
  CHECK(j.contains("wall_time"));
  CHECK(j.contains("step_size"));
}

TEST_CASE("invalid JSON is an IoError") {
  const auto p = scratch("bad.json");
  { std::ofstream(p) << "{not json"; }
  CHECK_THROWS_AS(io::read_json(p), Error);
}
