#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>

#include "cli.hpp"
#include "pidc/baselines.hpp"
#include "pidc/quantnet.hpp"
#include "pidc/reduction.hpp"
#include "pidc/report.hpp"
#include "pidc/toys.hpp"

namespace pidc::cli {

namespace {

using nlohmann::json;

struct Globals {
  double tolerance = default_mi_tolerance;
  bool rational = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

// Shared input selection: a record file or a built-in toy case.
struct InputSpec {
  std::string input;
  std::string toy;

  void attach(CLI::App* sub) {
    auto* in = sub->add_option("--input,-i", input, "activation records (.csv, .jsonl or .bin)");
    auto* t = sub->add_option("--toy", toy, "built-in toy case");
    in->excludes(t);
  }
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<int> parse_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(error_kind::parse, std::string("malformed ") + what + " '" + text + "'");
    }
  }
  if (out.empty()) fail(error_kind::parse, std::string("empty ") + what);
  return out;
}

int max_sources_from_env() {
  const char* env = std::getenv("PID_MAX_SOURCES");
  if (!env || !*env) return default_max_sources;
  int v = 0;
  try {
    std::size_t used = 0;
    v = std::stoi(env, &used);
    if (used != std::strlen(env)) throw std::invalid_argument(env);
  } catch (const std::exception&) {
    fail(error_kind::parse, std::string("PID_MAX_SOURCES='") + env + "' is not an integer");
  }
  if (v < 1) fail(error_kind::parse, "PID_MAX_SOURCES must be at least 1");
  if (v >= max_lattice_sources) {
    fail(error_kind::size_limit, "PID_MAX_SOURCES=" + std::to_string(v) +
                                     ": the lattice order is only available up to " +
                                     std::to_string(max_lattice_sources - 1) + " sources");
  }
  return v;
}

class Context {
 public:
  Context(const Globals& g, std::string command, std::ostream& out, std::ostream& err)
      : g_(g), out_(out), err_(err), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.tolerance = g.tolerance;
    manifest_.started_utc = utc_now();
    manifest_.options["rational"] = g.rational;
    if (g.format) manifest_.options["format"] = *g.format;
    if (g.seed) manifest_.seeds.push_back(*g.seed);
  }

  const Globals& globals() const { return g_; }
  RunManifest& manifest() { return manifest_; }
  std::ostream& err() { return err_; }

  AnalyzeOptions analyze_options(unsigned threads = 1) const {
    AnalyzeOptions o;
    o.tolerance = g_.tolerance;
    o.mode = g_.rational ? NumericMode::rational : NumericMode::automatic;
    o.threads = threads;
    o.max_sources = max_sources_from_env();
    return o;
  }

  std::string describe(const InputSpec& spec) const {
    return spec.toy.empty() ? spec.input : "toy:" + spec.toy;
  }

  JointDistribution load(const InputSpec& spec) {
    if (!spec.toy.empty()) {
      manifest_.options["toy"] = spec.toy;
      return toy_distribution(spec.toy);
    }
    if (spec.input.empty()) fail(error_kind::parse, "one of --input or --toy is required");
    const std::filesystem::path path(spec.input);
    const RecordFormat format = g_.format ? parse_record_format(*g_.format) : record_format_from_path(path);
    const auto records = load_records(path, format);
    manifest_.add_input(path);
    EstimateOptions est;
    est.declared_bins = records.declared_bins;
    return estimate_joint(records, est);
  }

  void emit_text(const std::string& text) {
    if (g_.out) {
      std::ofstream file(*g_.out, std::ios::binary);
      if (!file) fail(error_kind::io, "cannot write " + *g_.out);
      file << text;
    } else {
      out_ << text;
    }
  }

  void emit(json report) {
    report["manifest"] = finish();
    emit_text(report.dump(2) + "\n");
  }

  json finish() {
    manifest_.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return manifest_.to_json();
  }

 private:
  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

void check_lattice_limit(const JointDistribution& dist, const AnalyzeOptions& o) {
  if (dist.n() > o.max_sources) {
    fail(error_kind::size_limit, "input has " + std::to_string(dist.n()) + " sources, the limit is " +
                                     std::to_string(o.max_sources) +
                                     "; reduce it with --coarse/--uniform-d or --subsample");
  }
}

// ------------------------------------------------------------------ lattice

struct LatticeArgs {
  int n = 0;
  bool allow_large = false;
};

int cmd_lattice(Context& ctx, const LatticeArgs& a) {
  ctx.manifest().options["n"] = a.n;
  ctx.manifest().options["allow_large"] = a.allow_large;
  const bool order = a.n < max_lattice_sources;
  ctx.err() << "estimated lattice memory: " << estimate_lattice_bytes(a.n, order) / (1024.0 * 1024.0) << " MiB\n";
  LatticeOptions lo;
  lo.allow_large = a.allow_large;
  lo.build_order = order;
  const auto lattice = RedundancyLattice::enumerate(a.n, lo);
  ctx.emit(lattice_json(lattice));
  return exit_ok;
}

// ------------------------------------------------------------------ analyze

struct AnalyzeArgs {
  InputSpec in;
  bool per_label = false;
  unsigned threads = 1;
  std::string map;
  int uniform_d = 0;
  std::optional<std::uint64_t> shuffle_seed;
  std::string subsample;
};

std::optional<CoarseGrainMap> requested_map(const std::string& text, int d, std::optional<std::uint64_t> shuffle,
                                            int n) {
  if (!text.empty()) return CoarseGrainMap::parse(text);
  if (d > 0) return shuffle ? random_uniform_map(n, d, *shuffle) : uniform_map(n, d);
  return std::nullopt;
}

int cmd_analyze(Context& ctx, const AnalyzeArgs& a) {
  auto dist = ctx.load(a.in);
  const auto options = [&] {
    auto o = ctx.analyze_options(a.threads);
    o.per_label = a.per_label;
    return o;
  }();
  ctx.manifest().options["per_label"] = a.per_label;
  ctx.manifest().options["threads"] = a.threads;
  json reduction;
  if (auto map = requested_map(a.map, a.uniform_d, a.shuffle_seed, dist.n())) {
    dist = coarse_grain(dist, *map);
    reduction = {{"mode", "coarse-grain"}, {"map", map->assignment()}};
    if (auto d = map->uniform_order()) reduction["order"] = *d;
    if (a.shuffle_seed) ctx.manifest().seeds.push_back(*a.shuffle_seed);
  } else if (!a.subsample.empty()) {
    auto picked = subsample(dist, parse_list(a.subsample, "index list"));
    dist = std::move(picked.distribution);
    reduction = {{"mode", "subsample"}, {"indices", picked.indices}, {"warning", subsample_warning}};
  }
  check_lattice_limit(dist, options);
  const auto result = analyze(dist, options);
  json report = pid_result_json(result, ctx.describe(a.in));
  if (!reduction.is_null()) report["reduction"] = reduction;
  ctx.emit(std::move(report));
  if (result.complexity_out_of_range()) {
    ctx.err() << "warning: complexity " << *result.complexity << " lies outside [1, " << result.n << "]\n";
  }
  if (!result.complexity) {
    ctx.err() << "error: complexity undefined, I(T:S) = " << result.total_mi << " bits is within the tolerance\n";
    return exit_undefined;
  }
  return exit_ok;
}

// --------------------------------------------------------------------- toy

struct ToyArgs {
  std::vector<std::string> cases;
  bool all = false;
};

int cmd_toy(Context& ctx, std::ostream& out, const ToyArgs& a) {
  std::vector<std::string> names = a.cases;
  if (a.all || names.empty()) {
    names.clear();
    for (const auto& c : toy_cases()) names.push_back(c.name);
  }
  ctx.manifest().options["cases"] = names;
  auto options = ctx.analyze_options();
  json results = json::array();
  bool all_passed = true;
  for (const auto& name : names) {
    const auto r = run_toy(name, options);
    char line[160];
    std::snprintf(line, sizeof line, "%-14s C = %.4f   reference %.2f   %s  (%s)\n", name.c_str(), r.complexity,
                  r.toy.reference, r.passed ? "PASS" : "FAIL", r.method.c_str());
    out << line;
    if (r.coarse_order) {
      std::snprintf(line, sizeof line, "%-14s coarse d=%d bounds [%.4f, %.4f]\n", "", *r.coarse_order, *r.coarse_lower,
                    *r.coarse_upper);
      out << line;
    }
    all_passed = all_passed && r.passed;
    results.push_back(toy_json(r));
  }
  if (ctx.globals().out) ctx.emit({{"cases", std::move(results)}});
  return all_passed ? exit_ok : exit_failure;
}

// ------------------------------------------------------------------ coarse

struct CoarseArgs {
  InputSpec in;
  std::string map;
  int uniform_d = 0;
  std::optional<std::uint64_t> shuffle_seed;
  bool verify = false;
};

int cmd_coarse(Context& ctx, const CoarseArgs& a) {
  const auto dist = ctx.load(a.in);
  auto map = requested_map(a.map, a.uniform_d, a.shuffle_seed, dist.n());
  if (!map) fail(error_kind::parse, "coarse needs --map or --uniform-d");
  if (a.shuffle_seed) ctx.manifest().seeds.push_back(*a.shuffle_seed);
  ctx.manifest().options["map"] = map->to_string();
  ctx.manifest().options["verify"] = a.verify;
  const auto options = ctx.analyze_options();
  const auto reduced = coarse_grain(dist, *map);
  check_lattice_limit(reduced, options);
  ReductionReport report;
  if (a.verify) {
    check_lattice_limit(dist, options);
    report = verify_bounds(dist, *map, options);
  } else {
    report = reduce_coarse(dist, *map, options);
  }
  report.seed = a.shuffle_seed;
  json out{{"reduction", reduction_json(report)},
           {"coarse_pid", pid_result_json(analyze(reduced, options), ctx.describe(a.in))}};
  ctx.emit(std::move(out));
  if (report.bounds_hold && !*report.bounds_hold) {
    ctx.err() << "error: coarse-graining bounds violated\n";
    return exit_failure;
  }
  return exit_ok;
}

// --------------------------------------------------------------- subsample

struct SubsampleArgs {
  InputSpec in;
  std::string indices;
  int random = 0;
  int draws = 26;
};

int cmd_subsample(Context& ctx, const SubsampleArgs& a) {
  const auto dist = ctx.load(a.in);
  const auto options = ctx.analyze_options();
  std::vector<std::vector<int>> selections;
  if (!a.indices.empty()) {
    selections.push_back(parse_list(a.indices, "index list"));
  } else if (a.random > 0) {
    const std::uint64_t seed = ctx.globals().seed.value_or(0);
    if (!ctx.globals().seed) ctx.manifest().seeds.push_back(seed);
    for (int d = 0; d < a.draws; ++d) selections.push_back(random_indices(dist.n(), a.random, seed + d));
    ctx.manifest().options["random"] = a.random;
    ctx.manifest().options["draws"] = a.draws;
  } else {
    fail(error_kind::parse, "subsample needs --indices or --random");
  }
  json draws = json::array();
  for (const auto& sel : selections) {
    const auto picked = subsample(dist, sel);
    const auto pid = analyze(picked.distribution, options);
    draws.push_back({{"indices", sel},
                     {"total_mi_bits", pid.total_mi},
                     {"complexity", pid.complexity ? json(*pid.complexity) : json(nullptr)}});
  }
  ctx.emit({{"mode", "subsample"}, {"draws", std::move(draws)}, {"warning", subsample_warning}});
  return exit_ok;
}

// -------------------------------------------------------------------- reing

struct ReingArgs {
  InputSpec in;
  bool compare = false;
};

int cmd_reing(Context& ctx, const ReingArgs& a) {
  const auto dist = ctx.load(a.in);
  const auto dd = directed_differences(dist);
  std::optional<double> c;
  if (dd.total_mi > ctx.globals().tolerance) c = reing_complexity(dd, ctx.globals().tolerance);
  json report = directed_differences_json(dd, c);
  if (a.compare) {
    const auto options = ctx.analyze_options();
    check_lattice_limit(dist, options);
    report["comparison"] = comparison_json(compare(dist, options));
  }
  ctx.emit(std::move(report));
  if (!c) {
    ctx.err() << "error: Reing complexity undefined, I(T:S) is within the tolerance\n";
    return exit_undefined;
  }
  return exit_ok;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string idx_images;
  std::string idx_labels;
  std::size_t max_samples = 8000;
  int repeats = 64;
  int epochs = 100;
  std::string checkpoints;
  std::string dump_dir;
  std::optional<std::uint64_t> shuffle_labels;
};

int cmd_train(Context& ctx, std::ostream& out, const TrainArgs& a) {
  const bool idx = !a.idx_images.empty() || !a.idx_labels.empty();
  if (idx && (a.idx_images.empty() || a.idx_labels.empty())) {
    fail(error_kind::parse, "--idx-images and --idx-labels must be given together");
  }
  Dataset data;
  if (idx) {
    data = load_idx_dataset(a.idx_images, a.idx_labels, a.max_samples);
    ctx.manifest().add_input(a.idx_images);
    ctx.manifest().add_input(a.idx_labels);
  } else {
    data = synthetic_dataset(a.repeats);
    ctx.manifest().options["repeats"] = a.repeats;
  }
  NetConfig config = synthetic_net_config(1);
  if (!a.config.empty()) {
    config = load_net_config(a.config);
    ctx.manifest().add_input(a.config);
  } else if (idx) {
    fail(error_kind::parse, "IDX training needs --config");
  }
  if (ctx.globals().seed) config.seed = *ctx.globals().seed;
  if (a.shuffle_labels) {
    data = shuffle_labels(data, *a.shuffle_labels);
    ctx.manifest().seeds.push_back(*a.shuffle_labels);
  }
  config.validate(data.classes);

  TrainOptions to;
  to.epochs = a.epochs;
  to.checkpoints = a.checkpoints.empty() ? std::vector<int>{0, 1, a.epochs} : parse_list(a.checkpoints, "checkpoint list");
  to.dump_dir = a.dump_dir;
  if (ctx.globals().format) to.dump_format = parse_record_format(*ctx.globals().format);
  ctx.manifest().options["epochs"] = a.epochs;
  ctx.manifest().options["checkpoints"] = to.checkpoints;
  ctx.manifest().options["net"] = json::parse(net_config_json(config));
  ctx.manifest().options["gradient"] = "straight-through";
  if (ctx.manifest().seeds.empty() || ctx.manifest().seeds.front() != config.seed) {
    ctx.manifest().seeds.insert(ctx.manifest().seeds.begin(), config.seed);
  }

  QuantizedNet net(config);
  const auto result = train(net, data, to);
  json checkpoints = json::array();
  for (const auto& d : result.dumps) {
    checkpoints.push_back({{"epoch", d.epoch}, {"accuracy", d.accuracy},
                           {"loss", std::isnan(d.loss) ? json(nullptr) : json(d.loss)}});
  }
  json files = json::array();
  for (const auto& f : result.files) files.push_back(f.filename().string());
  out.flush();
  ctx.emit({{"final_accuracy", result.final_accuracy},
            {"final_loss", result.loss_history.empty() ? json(nullptr) : json(result.loss_history.back())},
            {"clamped_activations", result.clamped},
            {"checkpoints", std::move(checkpoints)},
            {"dump_dir", a.dump_dir},
            {"files", std::move(files)}});
  return exit_ok;
}

// -------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string dump_dir;
  unsigned threads = 1;
};

int cmd_sweep(Context& ctx, const SweepArgs& a) {
  ctx.manifest().options["dump_dir"] = a.dump_dir;
  ctx.manifest().options["threads"] = a.threads;
  const auto result = sweep_directory(a.dump_dir, ctx.analyze_options(), a.threads);
  ctx.emit_text(sweep_csv(result));
  if (ctx.globals().out) {
    std::ofstream side(*ctx.globals().out + ".manifest.json");
    json manifest = ctx.finish();
    manifest["skipped"] = result.skipped;
    side << manifest.dump(2) << "\n";
  }
  for (const auto& s : result.skipped) ctx.err() << "skipped " << s << "\n";
  return result.skipped.empty() ? exit_ok : exit_partial;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pidc: partial information decomposition and representational complexity"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Globals g;
  app.add_option("--tolerance", g.tolerance, "zero-information tolerance in bits")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_flag("--rational", g.rational, "exact rational arithmetic (up to 3 sources)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out,-o", g.out, "write the report to a file instead of stdout");
  app.add_option("--format", g.format, "record format (csv, jsonl, bin)")
      ->check(CLI::IsMember({"csv", "jsonl", "bin", "binary"}));

  LatticeArgs lattice;
  auto* s_lattice = app.add_subcommand("lattice", "enumerate the redundancy lattice");
  s_lattice->add_option("--n", lattice.n, "number of sources")->required()->check(CLI::Range(1, 6));
  s_lattice->add_flag("--allow-large", lattice.allow_large, "permit n = 6");

  AnalyzeArgs analyze_args;
  auto* s_analyze = app.add_subcommand("analyze", "PID and representational complexity of a joint distribution");
  analyze_args.in.attach(s_analyze);
  s_analyze->add_flag("--per-label", analyze_args.per_label, "add the per-label breakdown");
  s_analyze->add_option("--threads", analyze_args.threads, "workers for the redundancy phase")->check(CLI::Range(1, 256));
  auto* a_map = s_analyze->add_option("--coarse", analyze_args.map, "coarse-grain map, e.g. 1,1,2,2");
  auto* a_d = s_analyze->add_option("--uniform-d", analyze_args.uniform_d, "uniform coarse-grain order");
  s_analyze->add_option("--shuffle-seed", analyze_args.shuffle_seed, "random uniform map seed")->needs(a_d);
  auto* a_sub = s_analyze->add_option("--subsample", analyze_args.subsample, "source indices, e.g. 1,3,5");
  a_map->excludes(a_d)->excludes(a_sub);
  a_d->excludes(a_sub);

  ToyArgs toy;
  auto* s_toy = app.add_subcommand("toy", "built-in encodings with reference complexities");
  s_toy->add_option("case", toy.cases, "case names (default: all)");
  s_toy->add_flag("--all", toy.all, "run every case");

  CoarseArgs coarse;
  auto* s_coarse = app.add_subcommand("coarse", "coarse-grain sources into super-sources");
  coarse.in.attach(s_coarse);
  auto* c_map = s_coarse->add_option("--map", coarse.map, "coarse-grain map, e.g. 1,1,2,2");
  auto* c_d = s_coarse->add_option("--uniform-d", coarse.uniform_d, "uniform coarse-grain order");
  s_coarse->add_option("--shuffle-seed", coarse.shuffle_seed, "random uniform map seed")->needs(c_d);
  s_coarse->add_flag("--verify", coarse.verify, "also compute the full complexity and check the bounds");
  c_map->excludes(c_d);

  SubsampleArgs sub;
  auto* s_sub = app.add_subcommand("subsample", "analyze a subset of sources (no bound on the full complexity)");
  sub.in.attach(s_sub);
  auto* s_idx = s_sub->add_option("--indices", sub.indices, "source indices, e.g. 1,3,5");
  auto* s_rand = s_sub->add_option("--random", sub.random, "draw this many sources at random")->check(CLI::Range(1, 5));
  s_sub->add_option("--draws", sub.draws, "number of random draws")->check(CLI::Range(1, 100000))->capture_default_str();
  s_idx->excludes(s_rand);

  ReingArgs reing;
  auto* s_reing = app.add_subcommand("reing", "directed local differences and Reing complexity");
  reing.in.attach(s_reing);
  s_reing->add_flag("--compare", reing.compare, "add the PID backbone comparison");

  TrainArgs train_args;
  auto* s_train = app.add_subcommand("train", "train a quantized network and dump layer activations");
  s_train->add_option("--config", train_args.config, "network config (JSON)");
  s_train->add_option("--idx-images", train_args.idx_images, "IDX image file");
  s_train->add_option("--idx-labels", train_args.idx_labels, "IDX label file");
  s_train->add_option("--max-samples", train_args.max_samples, "cap on training rows")->capture_default_str();
  s_train->add_option("--repeats", train_args.repeats, "synthetic task: copies of each input pattern")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  s_train->add_option("--epochs", train_args.epochs, "training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  s_train->add_option("--checkpoints", train_args.checkpoints, "epochs to dump, e.g. 0,1,100");
  s_train->add_option("--dump-dir", train_args.dump_dir, "directory for activation dumps")->required();
  s_train->add_option("--shuffle-labels", train_args.shuffle_labels, "reassign labels with this seed");

  SweepArgs sweep;
  auto* s_sweep = app.add_subcommand("sweep", "complexity table over a directory of activation dumps");
  s_sweep->add_option("--dump-dir", sweep.dump_dir, "directory written by train")->required();
  s_sweep->add_option("--threads", sweep.threads, "files analyzed in parallel")->check(CLI::Range(1, 256));

  for (auto* sub_app : app.get_subcommands({})) sub_app->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_parse;
  }

  auto* chosen = app.get_subcommands().front();
  Context ctx(g, chosen->get_name(), out, err);
  try {
    if (chosen == s_lattice) return cmd_lattice(ctx, lattice);
    if (chosen == s_analyze) return cmd_analyze(ctx, analyze_args);
    if (chosen == s_toy) return cmd_toy(ctx, out, toy);
    if (chosen == s_coarse) return cmd_coarse(ctx, coarse);
    if (chosen == s_sub) return cmd_subsample(ctx, sub);
    if (chosen == s_reing) return cmd_reing(ctx, reing);
    if (chosen == s_train) return cmd_train(ctx, out, train_args);
    return cmd_sweep(ctx, sweep);
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace pidc::cli
