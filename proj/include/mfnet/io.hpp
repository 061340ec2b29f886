#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfnet/metrics.hpp"
#include "mfnet/model.hpp"
#include "mfnet/nsystem.hpp"

namespace mfnet {

using Json = nlohmann::json;

/// Parse a model document. Shape errors throw ValidationError; invariants are left to validate().
ModelSpec model_from_json(const Json& doc);
Json model_to_json(const ModelSpec& spec);
ModelSpec load_model(const std::string& path);
void save_model(const ModelSpec& spec, const std::string& path);

Json load_json(const std::string& path);
/// Keys come out sorted (std::map objects); two-space indent and a trailing newline.
void save_json(const Json& doc, const std::string& path);

// Comma-separated output with a header row, '.' decimals and 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << '\n';
  }
  void row(const std::vector<double>& cells);

 private:
  std::ofstream out_;
};

Json rate_fit_to_json(const RateFit& fit);
void write_rate_fit_csv(const RateFit& fit, const std::string& path);

/// Columns entity_kind, i, j, time, new_state (1-based ids; initial states at time 0).
void write_trajectory_csv(const TrajectoryLog& log, const std::string& path);

}  // namespace mfnet
