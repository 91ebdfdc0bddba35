#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pidc/error.hpp"
#include "pidc/pid.hpp"
#include "pidc/records.hpp"

namespace pidc::cli {

enum exit_code : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_parse = 2,
  exit_undefined = 3,
  exit_size_limit = 4,
  exit_partial = 5,
};

int exit_code_for(error_kind kind);

// Everything but `timing` is a deterministic function of the invocation.
struct RunManifest {
  std::string command;
  nlohmann::json options = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::uint64_t> seeds;
  double tolerance = default_mi_tolerance;
  std::string started_utc;
  double wall_clock_seconds = 0;

  void add_input(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

std::string sha256_hex(const std::filesystem::path& path);
std::string tool_version();

struct SweepRow {
  std::int64_t run = 0;
  int epoch = 0;
  int layer = 0;
  int n = 0;
  double mi_bits = 0;
  std::optional<double> complexity;
  std::optional<double> multiplicity;
  std::map<int, double> backbone;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> skipped;  // "file: reason"
};

// Analyzes every run<r>_epoch<k>_layer<j>.{csv,jsonl,bin} file in `dir`;
// rows come back sorted by (run, epoch, layer).
SweepResult sweep_directory(const std::filesystem::path& dir, const AnalyzeOptions& options, unsigned workers = 1);
std::string sweep_csv(const SweepResult& result);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pidc::cli
