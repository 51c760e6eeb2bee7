#include "brightside/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "brightside/error.hpp"

namespace brightside::io {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::out_of_range&) {
    // stod rejects subnormals and overflow; strtod returns the rounded value.
    return std::strtod(s.c_str(), nullptr);
  } catch (const std::exception&) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::IoError, path.string() + ": bad number '" + s + "'");
  }
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double from_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorCode::IoError, "expected a number");
}

Json vec(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Vector vec_from(const Json& j) {
  Vector v;
  for (const auto& x : j) v.push_back(from_number(x));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vector SampleTable::column(std::size_t j) const {
  Vector out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = values[i * dim + j];
  return out;
}

void write_samples_csv(const fs::path& path, const kernels::ChainOutput& chain) {
  std::ofstream out = open_out(path);
  out << "iter";
  for (std::size_t j = 0; j < chain.dim; ++j) out << ",y_" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < chain.n_kept; ++i) {
    out << chain.kept_iterations[i];
    for (double v : chain.sample(i)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

SampleTable read_samples_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, path.string() + ": empty file");
  const auto header = split(line);
  if (header.empty() || header[0] != "iter")
    throw Error(ErrorCode::IoError, path.string() + ": expected header 'iter,y_1,...'");
  SampleTable t;
  t.dim = header.size() - 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::IoError, path.string() + ": ragged row");
    t.iterations.push_back(static_cast<std::size_t>(std::stoull(cells[0])));
    for (std::size_t j = 1; j < cells.size(); ++j) t.values.push_back(parse_double(cells[j], path));
  }
  return t;
}

void write_regression_csv(const fs::path& path, const targets::RegressionData& data) {
  std::ofstream out = open_out(path);
  for (std::size_t j = 0; j < data.d; ++j) out << "x_" << (j + 1) << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.n; ++i) {
    for (double v : data.row(i)) out << format_double(v) << ',';
    out << data.y[i] << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

targets::RegressionData read_regression_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, path.string() + ": empty file");
  const auto header = split(line);
  if (header.size() < 2 || header.back() != "y")
    throw Error(ErrorCode::IoError, path.string() + ": header must be x_1,...,x_d,y");
  for (std::size_t j = 0; j + 1 < header.size(); ++j)
    if (header[j] != "x_" + std::to_string(j + 1))
      throw Error(ErrorCode::IoError, path.string() + ": unexpected column '" + header[j] + "'");
  targets::RegressionData data;
  data.d = header.size() - 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::IoError, path.string() + ": ragged row");
    for (std::size_t j = 0; j < data.d; ++j) data.X.push_back(parse_double(cells[j], path));
    const double yv = parse_double(cells.back(), path);
    if (yv != 0.0 && yv != 1.0) throw Error(ErrorCode::IoError, path.string() + ": y must be 0/1");
    data.y.push_back(static_cast<int>(yv));
  }
  data.n = data.y.size();
  if (data.n == 0) throw Error(ErrorCode::IoError, path.string() + ": no rows");
  return data;
}

void write_qq_csv(const fs::path& path, const std::vector<diagnostics::QQReport>& reports) {
  std::ofstream out = open_out(path);
  out << "coord,prob,sample_q,ref_q,rel_err,env_lo,env_hi\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.probs.size(); ++i)
      out << r.coordinate << ',' << format_double(r.probs[i]) << ','
          << format_double(r.sample_quantile[i]) << ',' << format_double(r.reference_quantile[i])
          << ',' << format_double(r.relative_error[i]) << ',' << format_double(r.envelope_lo[i])
          << ',' << format_double(r.envelope_hi[i]) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<diagnostics::QQReport> read_qq_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split(line).size() != 7 || split(line)[0] != "coord")
    throw Error(ErrorCode::IoError, path.string() + ": bad Q-Q header");
  std::vector<diagnostics::QQReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 7) throw Error(ErrorCode::IoError, path.string() + ": ragged row");
    const auto coord = static_cast<std::size_t>(std::stoull(c[0]));
    if (out.empty() || out.back().coordinate != coord) {
      out.emplace_back();
      out.back().coordinate = coord;
    }
    auto& r = out.back();
    r.probs.push_back(parse_double(c[1], path));
    r.sample_quantile.push_back(parse_double(c[2], path));
    r.reference_quantile.push_back(parse_double(c[3], path));
    r.relative_error.push_back(parse_double(c[4], path));
    r.envelope_lo.push_back(parse_double(c[5], path));
    r.envelope_hi.push_back(parse_double(c[6], path));
  }
  return out;
}

Json to_json(const diagnostics::QQReport& r) {
  Json reps = Json::array();
  for (const auto& q : r.replicate_quantiles) reps.push_back(vec(q));
  return Json{{"coord", r.coordinate},
              {"prob", vec(r.probs)},
              {"sample_q", vec(r.sample_quantile)},
              {"ref_q", vec(r.reference_quantile)},
              {"rel_err", vec(r.relative_error)},
              {"env_lo", vec(r.envelope_lo)},
              {"env_hi", vec(r.envelope_hi)},
              {"replicates", reps},
              {"denominator_floor", number(r.denominator_floor)}};
}

diagnostics::QQReport qq_from_json(const Json& j) {
  diagnostics::QQReport r;
  r.coordinate = j.at("coord").get<std::size_t>();
  r.probs = vec_from(j.at("prob"));
  r.sample_quantile = vec_from(j.at("sample_q"));
  r.reference_quantile = vec_from(j.at("ref_q"));
  r.relative_error = vec_from(j.at("rel_err"));
  r.envelope_lo = vec_from(j.at("env_lo"));
  r.envelope_hi = vec_from(j.at("env_hi"));
  if (j.contains("replicates"))
    for (const auto& q : j.at("replicates")) r.replicate_quantiles.push_back(vec_from(q));
  if (j.contains("denominator_floor")) r.denominator_floor = from_number(j.at("denominator_floor"));
  return r;
}

Json to_json(const tuning::TuneReport& r) {
  Json j{{"schema_version", kSchemaVersion},
         {"ell_o", r.ell_o},
         {"theta_bar",
          {{"h_o", vec(r.theta_bar.h_o)}, {"mu", vec(r.theta_bar.mu)}, {"R", r.theta_bar.R}}},
         {"objective_trace", vec(r.objective_trace)},
         {"grad_norm_trace", vec(r.grad_norm_trace)}};
  if (r.alignment)
    j["alignment"] = {{"cosine", number(r.alignment->cosine)},
                      {"relative_distance", number(r.alignment->relative_distance)}};
  if (!r.cosine_trace.empty()) j["cosine_trace"] = vec(r.cosine_trace);
  if (!r.distance_trace.empty()) j["distance_trace"] = vec(r.distance_trace);
  return j;
}

tuning::TuneReport tune_report_from_json(const Json& j) {
  tuning::TuneReport r;
  r.ell_o = j.at("ell_o").get<double>();
  const auto& t = j.at("theta_bar");
  r.theta_bar.h_o = vec_from(t.at("h_o"));
  r.theta_bar.mu = vec_from(t.at("mu"));
  r.theta_bar.R = t.at("R").get<double>();
  r.objective_trace = vec_from(j.at("objective_trace"));
  r.grad_norm_trace = vec_from(j.at("grad_norm_trace"));
  if (j.contains("alignment"))
    r.alignment = tuning::Alignment{from_number(j["alignment"].at("cosine")),
                                    from_number(j["alignment"].at("relative_distance"))};
  if (j.contains("cosine_trace")) r.cosine_trace = vec_from(j.at("cosine_trace"));
  if (j.contains("distance_trace")) r.distance_trace = vec_from(j.at("distance_trace"));
  return r;
}

Json to_json(const geometry::ProjectionParams& p) {
  return Json{{"h_o", vec(p.h_o)}, {"ell_o", p.ell_o}, {"mu", vec(p.mu)}, {"R", p.R}};
}

geometry::ProjectionParams params_from_json(const Json& j) {
  return {vec_from(j.at("h_o")), j.at("ell_o").get<double>(), vec_from(j.at("mu")),
          j.at("R").get<double>()};
}

Json chain_report(const kernels::ChainOutput& chain) {
  Json ess = Json::array();
  if (chain.n_kept >= 10)
    for (std::size_t j = 0; j < chain.dim; ++j) ess.push_back(diagnostics::ess(chain.coordinate(j)));
  Json j{{"schema_version", kSchemaVersion},
         {"kernel", std::string(kernels::to_string(chain.kind))},
         {"dimension", chain.dim},
         {"kept_samples", chain.n_kept},
         {"acceptance_rate", chain.acceptance_rate},
         {"ess", ess},
         {"step_size", chain.final_step_size},
         {"stepping_out_count", chain.stepping_out_count},
         {"seed", chain.seed},
         {"stream", chain.stream},
         {"wall_time", chain.wall_time},
         {"valid", chain.valid}};
  if (!chain.valid) j["error"] = chain.error;
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
  }
}

}  // namespace brightside::io
