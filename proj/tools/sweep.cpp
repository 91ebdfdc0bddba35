#include <algorithm>
#include <atomic>
#include <cstdio>
#include <regex>
#include <thread>

#include "cli.hpp"
#include "pidc/distribution.hpp"

namespace pidc::cli {

namespace {

struct Job {
  std::filesystem::path path;
  SweepRow row;
  std::optional<std::string> problem;
};

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SweepResult sweep_directory(const std::filesystem::path& dir, const AnalyzeOptions& options, unsigned workers) {
  if (!std::filesystem::is_directory(dir)) fail(error_kind::io, "dump directory " + dir.string() + " does not exist");
  static const std::regex pattern(R"(run(\d+)_epoch(\d+)_layer(\d+)\.(csv|jsonl|bin))");
  std::vector<Job> jobs;
  SweepResult result;
  std::vector<std::filesystem::path> entries;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) entries.push_back(entry.path());
  }
  std::sort(entries.begin(), entries.end());
  if (entries.empty()) fail(error_kind::io, "dump directory " + dir.string() + " is empty");
  for (const auto& path : entries) {
    std::smatch m;
    const std::string name = path.filename().string();
    if (!std::regex_match(name, m, pattern)) {
      result.skipped.push_back(name + ": name does not match run<seed>_epoch<k>_layer<j>");
      continue;
    }
    Job job;
    job.path = path;
    job.row.run = std::stoll(m[1]);
    job.row.epoch = std::stoi(m[2]);
    job.row.layer = std::stoi(m[3]);
    jobs.push_back(std::move(job));
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      try {
        const auto records = load_records(job.path, record_format_from_path(job.path));
        EstimateOptions est;
        est.declared_bins = records.declared_bins;
        const auto pid = analyze(estimate_joint(records, est), options);
        job.row.n = pid.n;
        job.row.mi_bits = pid.total_mi;
        job.row.complexity = pid.complexity;
        job.row.multiplicity = pid.multiplicity;
        job.row.backbone = pid.backbone;
      } catch (const error& e) {
        job.problem = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto& job : jobs) {
    if (job.problem) {
      result.skipped.push_back(job.path.filename().string() + ": " + *job.problem);
    } else {
      result.rows.push_back(std::move(job.row));
    }
  }
  std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.run, a.epoch, a.layer) < std::tie(b.run, b.epoch, b.layer);
  });
  std::sort(result.skipped.begin(), result.skipped.end());
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  int max_m = 0;
  for (const auto& row : result.rows) max_m = std::max(max_m, row.n);
  std::string out = "run,epoch,layer,n,mi_bits,complexity,multiplicity";
  for (int m = 1; m <= max_m; ++m) out += ",backbone_" + std::to_string(m);
  out += '\n';
  for (const auto& row : result.rows) {
    out += std::to_string(row.run) + ',' + std::to_string(row.epoch) + ',' + std::to_string(row.layer) + ',' +
           std::to_string(row.n) + ',' + number(row.mi_bits) + ',';
    out += (row.complexity ? number(*row.complexity) : "") + ',';
    out += row.multiplicity ? number(*row.multiplicity) : "";
    for (int m = 1; m <= max_m; ++m) {
      out += ',';
      if (auto it = row.backbone.find(m); it != row.backbone.end()) out += number(it->second);
    }
    out += '\n';
  }
  return out;
}

}  // namespace pidc::cli
