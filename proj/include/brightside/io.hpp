#pragma once

// File formats. CSV for tables, JSON for reports. Doubles are written with 17
// significant digits so every file reads back bit-exact.
//
//   samples.csv      iter,y_1,...,y_d
//   regression csv   x_1,...,x_d,y
//   qq csv           coord,prob,sample_q,ref_q,rel_err,env_lo,env_hi

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "brightside/diagnostics.hpp"
#include "brightside/kernels.hpp"
#include "brightside/targets.hpp"
#include "brightside/tuning.hpp"

namespace brightside::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

std::string format_double(double v);

struct SampleTable {
  std::size_t dim = 0;
  std::vector<std::size_t> iterations;
  Vector values;  // rows x dim, row-major

  std::size_t rows() const noexcept { return iterations.size(); }
  Vector column(std::size_t j) const;
};

void write_samples_csv(const fs::path& path, const kernels::ChainOutput& chain);
SampleTable read_samples_csv(const fs::path& path);

void write_regression_csv(const fs::path& path, const targets::RegressionData& data);
// Link and prior settings are not part of the CSV; they come from the caller.
targets::RegressionData read_regression_csv(const fs::path& path);

void write_qq_csv(const fs::path& path, const std::vector<diagnostics::QQReport>& reports);
// Replicate quantiles are not stored in the CSV and come back empty.
std::vector<diagnostics::QQReport> read_qq_csv(const fs::path& path);

Json to_json(const diagnostics::QQReport& r);
diagnostics::QQReport qq_from_json(const Json& j);

Json to_json(const tuning::TuneReport& r);
tuning::TuneReport tune_report_from_json(const Json& j);

Json to_json(const geometry::ProjectionParams& p);
geometry::ProjectionParams params_from_json(const Json& j);

// acceptance rate, ESS per coordinate, step size, seed, wall time.
Json chain_report(const kernels::ChainOutput& chain);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

}  // namespace brightside::io
