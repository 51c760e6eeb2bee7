// brightside command-line front end.
//
//   brightside sample     [flags]   one chain -> samples.csv, report.json
//   brightside tune       [flags]   tuner -> tune.json
//   brightside experiment [flags]   all samplers of a preset -> qq_*.csv, summary.json
//
// Exit status: 0 success, 2 configuration error, 3 runtime failure. Failures
// print one JSON object on stderr.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "brightside/error.hpp"
#include "brightside/experiment.hpp"
#include "brightside/io.hpp"

namespace {

using brightside::Error;
using brightside::ErrorCode;
namespace ex = brightside::experiment;
namespace io = brightside::io;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Flags {
  std::optional<std::string> preset;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters, burnin, thin, dimension, replicates;
  std::optional<double> ell_o;
  std::optional<std::string> kernel;
  std::optional<std::string> out;
  bool paper_scale = false;
  bool no_tune = false;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--preset", f.preset, "cauchy | skewt | logistic | robit | custom");
  cmd.add_option("--config", f.config, "JSON configuration file");
  cmd.add_option("--seed", f.seed, "run seed");
  cmd.add_option("--iters", f.iters, "iterations per chain");
  cmd.add_option("--burnin", f.burnin, "burn-in iterations (step size adapted)");
  cmd.add_option("--thin", f.thin, "thinning factor");
  cmd.add_option("--ell-o", f.ell_o, "observer latitude in [1, 2]");
  cmd.add_option("--kernel", f.kernel, "SCS | SPS | RWM | HMC");
  cmd.add_option("--out", f.out, "output root directory");
  cmd.add_option("--dimension", f.dimension, "target dimension");
  cmd.add_option("--replicates", f.replicates, "independent chains per method");
  cmd.add_flag("--paper-scale", f.paper_scale, "published study sizes");
  cmd.add_flag("--no-tune", f.no_tune, "skip the tuner, use default projection parameters");
}

ex::ExperimentConfig resolve(const Flags& f) {
  io::Json j = io::Json::object();
  if (f.config) {
    if (!std::filesystem::exists(*f.config))
      throw Error(ErrorCode::ConfigError, "config file not found: " + *f.config);
    try {
      j = io::read_json(*f.config);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  }
  if (f.preset) j["preset"] = *f.preset;
  if (f.paper_scale) j["paper_scale"] = true;
  ex::ExperimentConfig c = ex::config_from_json(j);
  if (f.seed) c.seed = *f.seed;
  if (f.iters) c.iterations = *f.iters;
  if (f.burnin) c.burnin = *f.burnin;
  if (f.thin) c.thinning = *f.thin;
  if (f.dimension) c.dimension = *f.dimension;
  if (f.replicates) c.replicates = *f.replicates;
  if (f.ell_o) c.ell_o = *f.ell_o;
  if (f.kernel) c.kernel = brightside::kernels::parse_kernel_kind(*f.kernel);
  if (f.out) c.output_dir = *f.out;
  if (f.no_tune) c.tune = false;
  ex::validate(c);
  return c;
}

int fail(int status, std::string_view kind, std::string_view message) {
  const io::Json j{{"error", kind}, {"message", message}, {"exit_code", status}};
  std::cerr << j.dump() << std::endl;
  return status;
}

int fail(const Error& e) {
  const bool config = e.code() == ErrorCode::ConfigError;
  return fail(config ? kExitConfig : kExitRuntime, brightside::to_string(e.code()), e.what());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-Cauchy projection sampling experiments"};
  app.require_subcommand(1);
  Flags sample_flags, tune_flags, exp_flags;
  auto* sample = app.add_subcommand("sample", "run one chain");
  auto* tune = app.add_subcommand("tune", "fit projection parameters");
  auto* experiment = app.add_subcommand("experiment", "run every sampler of a preset");
  add_flags(*sample, sample_flags);
  add_flags(*tune, tune_flags);
  add_flags(*experiment, exp_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, "ConfigError", e.what());
  }

  try {
    if (*sample) {
      const auto c = resolve(sample_flags);
      const auto r = ex::run_sample(c);
      const io::Json out{{"samples", (c.run_dir() / "samples.csv").string()},
                         {"report", (c.run_dir() / "report.json").string()},
                         {"acceptance_rate", r.chain.acceptance_rate}};
      std::cout << out.dump() << std::endl;
    } else if (*tune) {
      const auto c = resolve(tune_flags);
      const auto r = ex::run_tune(c);
      io::Json out{{"tune", (c.run_dir() / "tune.json").string()},
                   {"R", r.theta_bar.R},
                   {"final_objective", r.objective_trace.back()}};
      if (r.alignment) out["cosine"] = r.alignment->cosine;
      std::cout << out.dump() << std::endl;
    } else if (*experiment) {
      const auto c = resolve(exp_flags);
      const auto r = ex::run_experiment(c);
      const io::Json out{{"summary", (c.run_dir() / "summary.json").string()},
                         {"status", r.summary["status"]}};
      std::cout << out.dump() << std::endl;
      if (r.mandatory_failed) return fail(kExitRuntime, "MandatoryMethodFailed", "SCS chain failed");
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(kExitRuntime, "RuntimeError", e.what());
  }
  return 0;
}
