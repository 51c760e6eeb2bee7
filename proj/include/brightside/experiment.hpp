#pragma once

// Experiment harness: presets, JSON configuration, and the sample / tune /
// experiment drivers used by the command-line tool.
//
// Artifacts of a run go to <output_dir>/<preset>/ so presets never share a
// directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "brightside/diagnostics.hpp"
#include "brightside/io.hpp"
#include "brightside/kernels.hpp"
#include "brightside/targets.hpp"
#include "brightside/tuning.hpp"

namespace brightside::experiment {

enum class Preset { Cauchy, SkewT, Logistic, Robit, Custom };

std::string_view to_string(Preset p) noexcept;
Preset parse_preset(std::string_view name);  // throws ConfigError

struct ExperimentConfig {
  Preset preset = Preset::Cauchy;
  bool paper_scale = false;
  std::size_t dimension = 10;
  std::size_t iterations = 100000;
  std::size_t burnin = 1000;
  std::size_t thinning = 1;
  std::uint64_t seed = 1;
  std::size_t replicates = 4;
  double ell_o = 1.1;
  std::optional<kernels::KernelKind> kernel;  // sample: which kernel; experiment: run only this one
  bool tune = true;
  std::filesystem::path output_dir = "out";

  double h = 0.1;
  std::size_t leapfrog_steps = 10;
  // Every coordinate of the initial point. Unset: start at the tuned location
  // mu when tuning ran (the centre of the fitted projection), else at 0.
  std::optional<double> init_value;

  std::size_t tune_steps = 2000;
  std::size_t tune_batch = 2000;
  double learning_rate = 0.01;

  double nu = 1.0;  // skew-t / custom Student-t degrees of freedom
  double xi_spread = 0.0;  // skew-t location equally spaced in [-xi_spread, xi_spread]

  std::size_t observations = 30;   // regression presets
  double link_nu = 2.0;
  double prior_nu = 2.0;
  std::optional<std::filesystem::path> data_csv;  // regression data instead of generated
  std::optional<targets::Link> link;              // custom preset with data_csv

  std::size_t reference_draws = 1000000;  // skewt exact-sampler reference
  std::size_t reference_factor = 10;      // regression reference chain length multiplier

  std::filesystem::path run_dir() const { return output_dir / std::string(to_string(preset)); }
};

// Desk-scale defaults, or the published study sizes with paper_scale.
ExperimentConfig preset_defaults(Preset preset, bool paper_scale = false);

// Reads {"preset": ..., "paper_scale": ..., <overrides>}. Unknown keys are
// rejected. Throws ConfigError.
ExperimentConfig config_from_json(const io::Json& j);
io::Json to_json(const ExperimentConfig& c);

// Checks every override against the library preconditions. Throws ConfigError.
void validate(const ExperimentConfig& c);

// Target, starting point and problem data for a configuration.
struct Problem {
  TargetPtr target;
  Vector init;
  std::optional<targets::SkewTParams> skew;
  std::optional<targets::RegressionData> data;
};
Problem build_problem(const ExperimentConfig& c);

// Projection parameters used when the tuner is off.
geometry::ProjectionParams untuned_params(const ExperimentConfig& c);

tuning::TuneOptions tune_options(const ExperimentConfig& c, const Problem& problem);

struct SampleResult {
  kernels::ChainOutput chain;
  std::optional<tuning::TuneReport> tune;
};

// One chain of the selected kernel (SCS by default). Writes samples.csv and
// report.json, plus tune.json when the tuner ran.
SampleResult run_sample(const ExperimentConfig& c);

// Writes tune.json.
tuning::TuneReport run_tune(const ExperimentConfig& c);

struct ExperimentResult {
  io::Json summary;
  bool mandatory_failed = false;
};

// All samplers of the preset over `replicates` seeds-streams, Q-Q reports
// against the preset reference, summary.json.
ExperimentResult run_experiment(const ExperimentConfig& c);

// Structural check of summary.json. Returns an empty string when valid,
// otherwise the first problem found.
std::string validate_summary(const io::Json& summary);

// Worker threads for `jobs` tasks: hardware concurrency capped by
// BRIGHTSIDE_THREADS when set.
std::size_t worker_count(std::size_t jobs);

// Runs fn(0..n-1) on worker threads. The first exception is rethrown after
// all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace brightside::experiment
