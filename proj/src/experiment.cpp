#include "brightside/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "brightside/error.hpp"

namespace brightside::experiment {
namespace {

using kernels::KernelKind;
using io::Json;

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kReferenceStream = 0x4ef;
constexpr std::uint64_t kTuneSeedSalt = 0x70e;
constexpr std::size_t kMaxReportedCoordinates = 4;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

bool is_regression(Preset p) { return p == Preset::Logistic || p == Preset::Robit; }

std::vector<KernelKind> preset_methods(const ExperimentConfig& c) {
  if (c.kernel) return {*c.kernel};
  switch (c.preset) {
    case Preset::Cauchy: return {KernelKind::SCS, KernelKind::SPS, KernelKind::RWM, KernelKind::HMC};
    case Preset::SkewT: return {KernelKind::SCS, KernelKind::HMC};
    case Preset::Logistic:
    case Preset::Robit: return {KernelKind::SCS, KernelKind::HMC, KernelKind::RWM};
    case Preset::Custom: return {KernelKind::SCS, KernelKind::RWM, KernelKind::HMC};
  }
  return {KernelKind::SCS};
}

// Regression presets give HMC a fifth of the iterations (ten leapfrog steps
// per iteration) with proportional thinning.
kernels::ChainSettings chain_settings(const ExperimentConfig& c, KernelKind kind,
                                      std::uint64_t stream) {
  kernels::ChainSettings s{c.iterations, c.burnin, c.thinning, c.seed, stream};
  if (is_regression(c.preset) && kind == KernelKind::HMC) {
    const std::size_t thin = std::max<std::size_t>(1, c.thinning / 5);
    const std::size_t post = (c.iterations - c.burnin) / 5;
    if (post >= thin) {
      s.iterations = c.burnin + post;
      s.thinning = thin;
    }
  }
  return s;
}

kernels::KernelConfig kernel_config(const ExperimentConfig& c, KernelKind kind) {
  kernels::KernelConfig k;
  k.kind = kind;
  k.h = c.h;
  k.leapfrog_steps = c.leapfrog_steps;
  k.target_accept = kernels::default_target_accept(kind);
  k.adapt_burnin = c.burnin;
  return k;
}

geometry::ProjectionParams sps_params(std::size_t d) {
  return geometry::ProjectionParams::stereographic(d, std::sqrt(static_cast<double>(d)));
}

template <class T>
T get_as(const Json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

std::size_t get_count(const Json& j, const char* key) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    config_error(std::string("config key '") + key + "' must be a non-negative integer");
  if (j.is_number_integer() && j.get<long long>() < 0)
    config_error(std::string("config key '") + key + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

Vector skew_alpha(std::size_t d) {
  Vector a(d, 0.0);
  a[0] = 100.0;
  if (d > 1) a[1] = -100.0;
  return a;
}

Vector skew_xi(std::size_t d, double spread) {
  Vector xi(d, 0.0);
  if (spread == 0.0) return xi;
  for (std::size_t i = 0; i < d; ++i)
    xi[i] = d == 1 ? spread : -spread + 2.0 * spread * static_cast<double>(i) / static_cast<double>(d - 1);
  return xi;
}

double semi_iqr(std::span<const double> sorted) {
  return 0.5 * (diagnostics::sorted_quantiles(sorted, {{0.75}})[0] -
                diagnostics::sorted_quantiles(sorted, {{0.25}})[0]);
}

Json max_errors(const diagnostics::QQReport& r) {
  return Json{{"all", r.max_relative_error()},
              {"tail", std::max(r.max_relative_error(0.0, 0.01), r.max_relative_error(0.99, 1.0))},
              {"central", r.max_relative_error(0.05, 0.95)}};
}

}  // namespace

std::string_view to_string(Preset p) noexcept {
  switch (p) {
    case Preset::Cauchy: return "cauchy";
    case Preset::SkewT: return "skewt";
    case Preset::Logistic: return "logistic";
    case Preset::Robit: return "robit";
    case Preset::Custom: return "custom";
  }
  return "?";
}

Preset parse_preset(std::string_view name) {
  for (Preset p : {Preset::Cauchy, Preset::SkewT, Preset::Logistic, Preset::Robit, Preset::Custom})
    if (name == to_string(p)) return p;
  config_error("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig preset_defaults(Preset preset, bool paper_scale) {
  ExperimentConfig c;
  c.preset = preset;
  c.paper_scale = paper_scale;
  switch (preset) {
    case Preset::Cauchy:
      c.init_value = 1e3;
      c.nu = 1.0;
      if (paper_scale) {
        c.dimension = 100;
        c.iterations = 500000;
        c.burnin = 100;
        c.thinning = 50;
        c.replicates = 10;
      }
      break;
    case Preset::SkewT:
      c.init_value = 1.0;
      c.nu = 1.0;
      c.thinning = 10;
      if (paper_scale) {
        c.dimension = 100;
        c.iterations = 500000;
        c.burnin = 100;
        c.thinning = 50;
        c.replicates = 10;
        c.reference_draws = 10000000;
      }
      break;
    case Preset::Logistic:
    case Preset::Robit:
      c.dimension = 5;
      c.observations = 30;
      c.burnin = 5000;  // step-size adaptation needs a few thousand steps here
      c.thinning = 10;
      c.tune_batch = 500;
      if (paper_scale) {
        c.dimension = 20;
        c.observations = 50;
        c.iterations = 5000000;
        c.burnin = 100;
        c.thinning = 500;
        c.replicates = 20;
      }
      break;
    case Preset::Custom:
      c.dimension = 2;
      c.iterations = 10000;
      c.replicates = 2;
      break;
  }
  return c;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  Preset preset = Preset::Cauchy;
  bool paper = false;
  if (j.contains("preset")) preset = parse_preset(get_as<std::string>(j.at("preset"), "preset"));
  if (j.contains("paper_scale")) paper = get_as<bool>(j.at("paper_scale"), "paper_scale");
  ExperimentConfig c = preset_defaults(preset, paper);

  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "preset" || key == "paper_scale") continue;
    if (key == "schema_version") {
      if (get_count(v, k) != static_cast<std::size_t>(io::kSchemaVersion))
        config_error("unsupported config schema_version");
    } else if (key == "dimension") c.dimension = get_count(v, k);
    else if (key == "iterations") c.iterations = get_count(v, k);
    else if (key == "burnin") c.burnin = get_count(v, k);
    else if (key == "thinning") c.thinning = get_count(v, k);
    else if (key == "seed") c.seed = get_count(v, k);
    else if (key == "replicates") c.replicates = get_count(v, k);
    else if (key == "ell_o") c.ell_o = get_as<double>(v, k);
    else if (key == "kernel") {
      if (v.is_null()) c.kernel.reset();
      else c.kernel = kernels::parse_kernel_kind(get_as<std::string>(v, k));
    } else if (key == "tune") c.tune = get_as<bool>(v, k);
    else if (key == "output_dir") c.output_dir = get_as<std::string>(v, k);
    else if (key == "h") c.h = get_as<double>(v, k);
    else if (key == "leapfrog_steps") c.leapfrog_steps = get_count(v, k);
    else if (key == "init_value") {
      if (v.is_null()) c.init_value.reset();
      else c.init_value = get_as<double>(v, k);
    }
    else if (key == "tune_steps") c.tune_steps = get_count(v, k);
    else if (key == "tune_batch") c.tune_batch = get_count(v, k);
    else if (key == "learning_rate") c.learning_rate = get_as<double>(v, k);
    else if (key == "nu") c.nu = get_as<double>(v, k);
    else if (key == "xi_spread") c.xi_spread = get_as<double>(v, k);
    else if (key == "observations") c.observations = get_count(v, k);
    else if (key == "link_nu") c.link_nu = get_as<double>(v, k);
    else if (key == "prior_nu") c.prior_nu = get_as<double>(v, k);
    else if (key == "data_csv") c.data_csv = get_as<std::string>(v, k);
    else if (key == "link") {
      const auto name = get_as<std::string>(v, k);
      if (name == "logit") c.link = targets::Link::Logit;
      else if (name == "robit") c.link = targets::Link::Robit;
      else config_error("link must be 'logit' or 'robit'");
    } else if (key == "reference_draws") c.reference_draws = get_count(v, k);
    else if (key == "reference_factor") c.reference_factor = get_count(v, k);
    else config_error("unknown config key '" + key + "'");
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j{{"schema_version", io::kSchemaVersion},
         {"preset", std::string(to_string(c.preset))},
         {"paper_scale", c.paper_scale},
         {"dimension", c.dimension},
         {"iterations", c.iterations},
         {"burnin", c.burnin},
         {"thinning", c.thinning},
         {"seed", c.seed},
         {"replicates", c.replicates},
         {"ell_o", c.ell_o},
         {"kernel", c.kernel ? Json(std::string(kernels::to_string(*c.kernel))) : Json(nullptr)},
         {"tune", c.tune},
         {"output_dir", c.output_dir.string()},
         {"h", c.h},
         {"leapfrog_steps", c.leapfrog_steps},
         {"init_value", c.init_value ? Json(*c.init_value) : Json(nullptr)},
         {"tune_steps", c.tune_steps},
         {"tune_batch", c.tune_batch},
         {"learning_rate", c.learning_rate},
         {"nu", c.nu},
         {"xi_spread", c.xi_spread},
         {"observations", c.observations},
         {"link_nu", c.link_nu},
         {"prior_nu", c.prior_nu},
         {"reference_draws", c.reference_draws},
         {"reference_factor", c.reference_factor}};
  if (c.data_csv) j["data_csv"] = c.data_csv->string();
  if (c.link) j["link"] = *c.link == targets::Link::Logit ? "logit" : "robit";
  return j;
}

void validate(const ExperimentConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (c.dimension < 1) config_error("dimension must be at least 1");
  if (c.iterations <= c.burnin) config_error("iterations must exceed burnin");
  if (c.thinning < 1) config_error("thinning must be at least 1");
  if ((c.iterations - c.burnin) / c.thinning < 1)
    config_error("no samples would be kept after burn-in and thinning");
  if (c.replicates < 1) config_error("replicates must be at least 1");
  if (!(c.ell_o >= 1.0 && c.ell_o <= 2.0)) config_error("ell_o must lie in [1, 2]");
  if (c.tune && c.ell_o >= 2.0) config_error("the tuner needs ell_o < 2; disable tuning for ell_o = 2");
  if (!positive(c.h)) config_error("h must be positive");
  if (c.leapfrog_steps < 1) config_error("leapfrog_steps must be at least 1");
  if (c.init_value && !std::isfinite(*c.init_value)) config_error("init_value must be finite");
  if (c.tune_steps < 1 || c.tune_batch < 1) config_error("tune_steps and tune_batch must be at least 1");
  if (!positive(c.learning_rate)) config_error("learning_rate must be positive");
  if (!positive(c.nu)) config_error("nu must be positive");
  if (!std::isfinite(c.xi_spread)) config_error("xi_spread must be finite");
  if (c.output_dir.empty()) config_error("output directory must be set");
  if (c.preset == Preset::SkewT && c.dimension < 2) config_error("skewt needs dimension >= 2");
  if (is_regression(c.preset) || (c.preset == Preset::Custom && c.data_csv)) {
    if (!c.data_csv && c.observations < 2) config_error("observations must be at least 2");
    if (!positive(c.link_nu) || !positive(c.prior_nu))
      config_error("link_nu and prior_nu must be positive");
  }
  if (c.data_csv && !std::filesystem::exists(*c.data_csv))
    config_error("data file not found: " + c.data_csv->string());
  if (c.data_csv && !is_regression(c.preset) && c.preset != Preset::Custom)
    config_error("data_csv applies to the logistic, robit and custom presets");
  if (c.preset == Preset::SkewT && c.reference_draws < 100)
    config_error("reference_draws must be at least 100");
  if (c.reference_factor < 1) config_error("reference_factor must be at least 1");
}

Problem build_problem(const ExperimentConfig& c) {
  Problem pb;
  auto regression = [&](targets::Link link) {
    targets::RegressionData data;
    if (c.data_csv) {
      data = io::read_regression_csv(*c.data_csv);
    } else {
      Rng rng = derive_stream(c.seed, kDataStream);
      data = targets::generate_separable_data(c.observations, c.dimension, rng);
    }
    data.link = link;
    data.link_nu = c.link_nu;
    data.prior_nu = c.prior_nu;
    pb.data = data;
    pb.target = targets::binary_regression_posterior(std::move(data));
  };
  switch (c.preset) {
    case Preset::Cauchy: pb.target = targets::standard_cauchy(c.dimension); break;
    case Preset::SkewT: {
      targets::SkewTParams sp{skew_xi(c.dimension, c.xi_spread), skew_alpha(c.dimension), c.nu};
      pb.skew = sp;
      pb.target = targets::skew_t(std::move(sp));
      break;
    }
    case Preset::Logistic: regression(targets::Link::Logit); break;
    case Preset::Robit: regression(targets::Link::Robit); break;
    case Preset::Custom:
      if (c.data_csv) regression(c.link.value_or(targets::Link::Logit));
      else pb.target = targets::mv_student_t(c.dimension, c.nu, {}, 1.0);
      break;
  }
  pb.init.assign(pb.target->dim(), c.init_value.value_or(0.0));
  return pb;
}

geometry::ProjectionParams untuned_params(const ExperimentConfig& c) {
  const std::size_t d = c.dimension;
  if (c.ell_o >= 2.0) return geometry::ProjectionParams::stereographic(d, 1.0);
  return {Vector(d, 0.0), c.ell_o, Vector(d, 0.0), 1.0};
}

tuning::TuneOptions tune_options(const ExperimentConfig& c, const Problem& problem) {
  tuning::TuneOptions o;
  o.ell_o = c.ell_o;
  o.mc_batch = c.tune_batch;
  o.steps = c.tune_steps;
  o.learning_rate = c.learning_rate;
  o.seed = mix_seed(c.seed ^ kTuneSeedSalt);
  if (problem.skew) o.reference = tuning::AlignmentReference{problem.skew->alpha_skew, problem.skew->xi};
  return o;
}

namespace {

struct Prepared {
  ExperimentConfig config;
  Problem problem;
};

Prepared prepare(const ExperimentConfig& config) {
  validate(config);
  Prepared p{config, build_problem(config)};
  // Data files fix the dimension.
  p.config.dimension = p.problem.target->dim();
  if (p.problem.data) {
    std::filesystem::create_directories(p.config.run_dir());
    io::write_regression_csv(p.config.run_dir() / "data.csv", *p.problem.data);
  }
  return p;
}

geometry::ProjectionParams scs_params(const Prepared& p, std::optional<tuning::TuneReport>& report) {
  if (!p.config.tune) return untuned_params(p.config);
  report = tuning::tune(*p.problem.target, tune_options(p.config, p.problem));
  io::write_json(p.config.run_dir() / "tune.json", io::to_json(*report));
  return report->theta_bar.with_latitude(p.config.ell_o);
}

Vector start_point(const Prepared& p, const std::optional<tuning::TuneReport>& report) {
  if (!p.config.init_value && report) return report->theta_bar.mu;
  return p.problem.init;
}

std::optional<geometry::ProjectionParams> params_for(KernelKind kind, std::size_t d,
                                                     const geometry::ProjectionParams& scs) {
  if (kind == KernelKind::SCS) return scs;
  if (kind == KernelKind::SPS) return sps_params(d);
  return std::nullopt;
}

}  // namespace

SampleResult run_sample(const ExperimentConfig& config) {
  const Prepared p = prepare(config);
  const ExperimentConfig& c = p.config;
  const KernelKind kind = c.kernel.value_or(KernelKind::SCS);
  SampleResult result;
  geometry::ProjectionParams scs = untuned_params(c);
  if (kind == KernelKind::SCS) scs = scs_params(p, result.tune);

  result.chain = kernels::run_chain(kernel_config(c, kind), params_for(kind, c.dimension, scs),
                                    *p.problem.target, start_point(p, result.tune),
                                    chain_settings(c, kind, 0));
  io::write_samples_csv(c.run_dir() / "samples.csv", result.chain);
  Json report = io::chain_report(result.chain);
  report["config"] = to_json(c);
  if (kind == KernelKind::SCS || kind == KernelKind::SPS)
    report["projection"] = io::to_json(*params_for(kind, c.dimension, scs));
  io::write_json(c.run_dir() / "report.json", report);
  if (!result.chain.valid)
    throw Error(ErrorCode::TargetFailure, "chain stopped early: " + result.chain.error);
  return result;
}

tuning::TuneReport run_tune(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.tune = true;
  const Prepared p = prepare(c);
  std::optional<tuning::TuneReport> report;
  scs_params(p, report);
  return *report;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Prepared p = prepare(config);
  const ExperimentConfig& c = p.config;
  const std::size_t d = c.dimension;
  const auto methods = preset_methods(c);
  const auto spec = diagnostics::QuantileSpec::standard();
  const std::size_t n_coord = std::min(d, kMaxReportedCoordinates);

  std::optional<tuning::TuneReport> tune_report;
  const bool needs_scs =
      std::find(methods.begin(), methods.end(), KernelKind::SCS) != methods.end() ||
      is_regression(c.preset) || (c.preset == Preset::Custom && c.data_csv);
  const geometry::ProjectionParams scs =
      needs_scs ? scs_params(p, tune_report) : untuned_params(c);
  const Vector init = start_point(p, tune_report);

  // Jobs: every (method, replicate) chain, then two reference chains for the
  // regression presets.
  const bool chain_reference = p.problem.data.has_value();
  const std::size_t n_method_jobs = methods.size() * c.replicates;
  const std::size_t n_jobs = n_method_jobs + (chain_reference ? 2 : 0);
  std::vector<kernels::ChainOutput> outputs(n_jobs);
  std::vector<std::string> failures(n_jobs);

  parallel_for(n_jobs, [&](std::size_t job) {
    try {
      if (job < n_method_jobs) {
        const std::size_t m = job / c.replicates, r = job % c.replicates;
        const KernelKind kind = methods[m];
        const std::uint64_t stream = 1000 * (static_cast<std::uint64_t>(kind) + 1) + r;
        outputs[job] = kernels::run_chain(kernel_config(c, kind), params_for(kind, d, scs),
                                          *p.problem.target, init, chain_settings(c, kind, stream));
      } else {
        const std::size_t which = job - n_method_jobs;
        kernels::ChainSettings s{c.iterations * c.reference_factor, c.burnin, c.thinning,
                                 c.seed + 1 + which, kReferenceStream};
        outputs[job] = kernels::run_chain(kernel_config(c, KernelKind::SCS), scs,
                                          *p.problem.target, init, s);
      }
      if (!outputs[job].valid) failures[job] = outputs[job].error;
    } catch (const std::exception& e) {
      failures[job] = e.what();
      outputs[job].valid = false;
    }
  });

  // Reference quantiles and relative-error floors per reported coordinate.
  std::vector<Vector> ref_q(n_coord);
  Vector floors(n_coord);
  Json reference;
  if (c.preset == Preset::Cauchy || (c.preset == Preset::Custom && !chain_reference && c.nu == 1.0)) {
    for (std::size_t j = 0; j < n_coord; ++j) {
      for (double pr : spec.probs) ref_q[j].push_back(diagnostics::standard_cauchy_quantile(pr));
      floors[j] = 1.0;
    }
    reference = {{"kind", "analytic"}, {"draws", 0}};
  } else if (p.problem.target->has_exact_sampler()) {
    Rng rng = derive_stream(c.seed, kReferenceStream);
    std::vector<Vector> cols(n_coord);
    for (auto& col : cols) col.reserve(c.reference_draws);
    for (std::size_t i = 0; i < c.reference_draws; ++i) {
      const Vector draw = p.problem.target->exact_sample(rng);
      for (std::size_t j = 0; j < n_coord; ++j) cols[j].push_back(draw[j]);
    }
    for (std::size_t j = 0; j < n_coord; ++j) {
      std::sort(cols[j].begin(), cols[j].end());
      ref_q[j] = diagnostics::sorted_quantiles(cols[j], spec);
      floors[j] = semi_iqr(cols[j]);
    }
    reference = {{"kind", "exact_sampler"}, {"draws", c.reference_draws}};
  } else if (chain_reference) {
    const auto& a = outputs[n_method_jobs];
    const auto& b = outputs[n_method_jobs + 1];
    if (!a.valid || !b.valid)
      throw Error(ErrorCode::TargetFailure, "reference chain failed: " +
                                                failures[a.valid ? n_method_jobs + 1 : n_method_jobs]);
    for (std::size_t j = 0; j < n_coord; ++j) {
      Vector pooled = a.coordinate(j);
      const Vector second = b.coordinate(j);
      pooled.insert(pooled.end(), second.begin(), second.end());
      std::sort(pooled.begin(), pooled.end());
      ref_q[j] = diagnostics::sorted_quantiles(pooled, spec);
      floors[j] = semi_iqr(pooled);
    }
    // Second-seed agreement on the first coefficient.
    const Vector ca = a.coordinate(0), cb = b.coordinate(0);
    Rng rng = derive_stream(c.seed, kReferenceStream + 1);
    std::size_t overlapping = 0, checked = 0;
    for (int k = 1; k <= 9; ++k) {
      const double pr = 0.1 * k;
      const auto ia = diagnostics::bootstrap_quantile_interval(
          ca, pr, 0.95, 200, diagnostics::suggested_block_length(ca), rng);
      const auto ib = diagnostics::bootstrap_quantile_interval(
          cb, pr, 0.95, 200, diagnostics::suggested_block_length(cb), rng);
      ++checked;
      if (ia.overlaps(ib)) ++overlapping;
    }
    reference = {{"kind", "reference_chain"},
                 {"draws", a.n_kept + b.n_kept},
                 {"agreement",
                  {{"coordinate", 0}, {"checked", checked}, {"overlapping", overlapping},
                   {"seeds_agree", overlapping == checked}}}};
  } else {
    reference = {{"kind", "none"}, {"draws", 0}};
  }
  reference["denominator_floor"] = floors;
  const bool have_reference = reference["kind"] != "none";

  Json method_list = Json::array();
  bool mandatory_failed = false, any_failed = false;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const KernelKind kind = methods[m];
    const bool mandatory = kind == KernelKind::SCS;
    std::vector<kernels::ChainOutput> valid;
    Json acc = Json::array(), steps = Json::array(), times = Json::array(), errors = Json::array();
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const auto& out = outputs[m * c.replicates + r];
      if (out.valid && out.n_kept > 0) valid.push_back(out);
      else errors.push_back(failures[m * c.replicates + r]);
      acc.push_back(out.acceptance_rate);
      steps.push_back(out.final_step_size);
      times.push_back(out.wall_time);
    }
    const std::string name(kernels::to_string(kind));
    Json entry{{"kernel", name},
               {"mandatory", mandatory},
               {"replicates", c.replicates},
               {"valid_replicates", valid.size()},
               {"acceptance_rate", acc},
               {"step_size", steps},
               {"wall_time", times},
               {"errors", errors},
               {"max_rel_error", nullptr},
               {"qq_csv", nullptr}};
    if (valid.size() < c.replicates) {
      any_failed = true;
      if (mandatory) mandatory_failed = true;
    }
    if (!valid.empty() && have_reference) {
      std::vector<diagnostics::QQReport> reports;
      Json per_coord = Json::array();
      double all = 0.0, tail = 0.0, central = 0.0;
      for (std::size_t j = 0; j < n_coord; ++j) {
        reports.push_back(diagnostics::qq_report(valid, j, ref_q[j], spec, floors[j]));
        const Json e = max_errors(reports.back());
        all = std::max(all, e["all"].get<double>());
        tail = std::max(tail, e["tail"].get<double>());
        central = std::max(central, e["central"].get<double>());
        per_coord.push_back(e);
      }
      const std::string file = "qq_" + name + ".csv";
      io::write_qq_csv(c.run_dir() / file, reports);
      Json qq_json = Json::array();
      for (const auto& r : reports) qq_json.push_back(io::to_json(r));
      io::write_json(c.run_dir() / ("qq_" + name + ".json"), qq_json);
      entry["max_rel_error"] = {{"all", all}, {"tail", tail}, {"central", central},
                                {"per_coordinate", per_coord}};
      entry["qq_csv"] = file;
    }
    method_list.push_back(entry);
  }

  Json coords = Json::array();
  for (std::size_t j = 0; j < n_coord; ++j) coords.push_back(j);
  Json summary{{"schema_version", io::kSchemaVersion},
               {"preset", std::string(to_string(c.preset))},
               {"status", mandatory_failed ? "failed" : (any_failed ? "partial" : "ok")},
               {"config", to_json(c)},
               {"coordinates", coords},
               {"probs", spec.probs},
               {"reference", reference},
               {"tuning", nullptr},
               {"methods", method_list}};
  if (tune_report) {
    summary["tuning"] = {{"theta_bar", io::to_json(tune_report->theta_bar.with_latitude(c.ell_o))},
                         {"final_objective", tune_report->objective_trace.back()}};
    if (tune_report->alignment) summary["tuning"]["cosine"] = tune_report->alignment->cosine;
  }
  io::write_json(c.run_dir() / "summary.json", summary);
  return {summary, mandatory_failed};
}

std::string validate_summary(const Json& s) {
  auto need = [&](const Json& obj, const char* key, bool (Json::*is)() const noexcept,
                  const std::string& where) -> std::string {
    if (!obj.is_object() || !obj.contains(key)) return where + ": missing '" + key + "'";
    if (!(obj.at(key).*is)()) return where + ": '" + key + "' has the wrong type";
    return {};
  };
  std::string err;
#define BRIGHTSIDE_NEED(obj, key, is, where) \
  if (!(err = need(obj, key, &Json::is, where)).empty()) return err
  BRIGHTSIDE_NEED(s, "schema_version", is_number_integer, "summary");
  if (s["schema_version"].get<int>() != io::kSchemaVersion) return "summary: unknown schema_version";
  BRIGHTSIDE_NEED(s, "preset", is_string, "summary");
  BRIGHTSIDE_NEED(s, "status", is_string, "summary");
  const auto status = s["status"].get<std::string>();
  if (status != "ok" && status != "partial" && status != "failed") return "summary: bad status";
  BRIGHTSIDE_NEED(s, "config", is_object, "summary");
  BRIGHTSIDE_NEED(s, "coordinates", is_array, "summary");
  BRIGHTSIDE_NEED(s, "probs", is_array, "summary");
  BRIGHTSIDE_NEED(s, "reference", is_object, "summary");
  BRIGHTSIDE_NEED(s["reference"], "kind", is_string, "reference");
  BRIGHTSIDE_NEED(s["reference"], "denominator_floor", is_array, "reference");
  BRIGHTSIDE_NEED(s, "methods", is_array, "summary");
  if (!s.contains("tuning") || !(s["tuning"].is_null() || s["tuning"].is_object()))
    return "summary: 'tuning' must be null or an object";
  for (const auto& m : s["methods"]) {
    BRIGHTSIDE_NEED(m, "kernel", is_string, "method");
    BRIGHTSIDE_NEED(m, "mandatory", is_boolean, "method");
    BRIGHTSIDE_NEED(m, "replicates", is_number_integer, "method");
    BRIGHTSIDE_NEED(m, "valid_replicates", is_number_integer, "method");
    BRIGHTSIDE_NEED(m, "acceptance_rate", is_array, "method");
    BRIGHTSIDE_NEED(m, "errors", is_array, "method");
    if (!m.contains("max_rel_error")) return "method: missing 'max_rel_error'";
    const auto& e = m["max_rel_error"];
    if (!e.is_null()) {
      for (const char* k : {"all", "tail", "central"})
        BRIGHTSIDE_NEED(e, k, is_number, "max_rel_error");
      if (!m["qq_csv"].is_string()) return "method: 'qq_csv' must name the Q-Q table";
    }
  }
#undef BRIGHTSIDE_NEED
  return {};
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BRIGHTSIDE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = std::min(n, static_cast<std::size_t>(v));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  const std::size_t workers = worker_count(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace brightside::experiment
