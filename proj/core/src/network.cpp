#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "pidc/error.hpp"
#include "pidc/quantnet.hpp"

namespace pidc {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t training_stream_salt = 0x9e3779b97f4a7c15ULL;

int binary_width(int classes) {
  int bits = 1;
  while ((1 << bits) < classes) ++bits;
  return bits;
}

Eigen::MatrixXd targets_for(const NetConfig& config, const std::vector<int>& labels, std::span<const std::size_t> idx) {
  const int out = config.widths.back();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(out, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const int label = labels[idx[c]];
    if (config.encoding == OutputEncoding::one_hot) {
      y(label, static_cast<Eigen::Index>(c)) = 1.0;
    } else {
      for (int b = 0; b < out; ++b) y(b, static_cast<Eigen::Index>(c)) = (label >> b) & 1;
    }
  }
  return y;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& inputs, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(inputs.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = inputs.col(idx[c]);
  return out;
}

void check_dataset(const NetConfig& config, const Dataset& data) {
  if (data.size() == 0) fail(error_kind::invalid_argument, "dataset is empty");
  if (data.inputs.cols() != static_cast<Eigen::Index>(data.size())) {
    fail(error_kind::invalid_argument, "dataset has mismatched input and label counts");
  }
  if (data.inputs.rows() != config.widths.front()) {
    fail(error_kind::invalid_argument, "dataset has " + std::to_string(data.inputs.rows()) +
                                           " features, network expects " + std::to_string(config.widths.front()));
  }
  config.validate(data.classes);
}

}  // namespace

std::string to_string(OutputEncoding e) { return e == OutputEncoding::one_hot ? "one_hot" : "binary"; }

OutputEncoding parse_output_encoding(const std::string& name) {
  if (name == "one_hot" || name == "onehot" || name == "one-hot") return OutputEncoding::one_hot;
  if (name == "binary") return OutputEncoding::binary;
  fail(error_kind::parse, "unknown output encoding '" + name + "'");
}

bool NetConfig::is_quantized(int hidden_layer) const {
  if (quantized_layers.empty()) return true;
  return std::find(quantized_layers.begin(), quantized_layers.end(), hidden_layer) != quantized_layers.end();
}

void NetConfig::validate(int classes) const {
  if (widths.size() < 2) fail(error_kind::invalid_argument, "network needs input and output widths");
  for (int w : widths) {
    if (w < 1) fail(error_kind::invalid_argument, "layer widths must be positive");
  }
  for (int l : quantized_layers) {
    if (l < 1 || l > hidden_layers()) fail(error_kind::invalid_argument, "quantized layer " + std::to_string(l) + " is not a hidden layer");
  }
  quantizer.validate();
  if (batch_size < 1) fail(error_kind::invalid_argument, "batch size must be positive");
  if (!(learning_rate > 0)) fail(error_kind::invalid_argument, "learning rate must be positive");
  if (classes > 0) {
    const int expected = encoding == OutputEncoding::one_hot ? classes : binary_width(classes);
    if (widths.back() != expected) {
      fail(error_kind::invalid_argument, to_string(encoding) + " encoding of " + std::to_string(classes) +
                                             " classes needs " + std::to_string(expected) + " outputs, got " +
                                             std::to_string(widths.back()));
    }
  }
}

NetConfig parse_net_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(error_kind::parse, std::string("net config: ") + e.what());
  }
  if (!j.is_object()) fail(error_kind::parse, "net config must be a JSON object");
  static const std::vector<std::string> known{"widths", "encoding", "quantized_layers", "quantizer",
                                              "seed",   "batch_size", "learning_rate"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) fail(error_kind::parse, "net config: unknown key '" + key + "'");
  }
  NetConfig c;
  try {
    if (j.contains("widths")) c.widths = j.at("widths").get<std::vector<int>>();
    if (j.contains("encoding")) c.encoding = parse_output_encoding(j.at("encoding").get<std::string>());
    if (j.contains("quantized_layers")) c.quantized_layers = j.at("quantized_layers").get<std::vector<int>>();
    if (j.contains("quantizer")) {
      const auto& q = j.at("quantizer");
      c.quantizer.sigma_min = q.value("sigma_min", c.quantizer.sigma_min);
      c.quantizer.sigma_max = q.value("sigma_max", c.quantizer.sigma_max);
      c.quantizer.bins = q.value("bins", c.quantizer.bins);
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  } catch (const json::exception& e) {
    fail(error_kind::parse, std::string("net config: ") + e.what());
  }
  c.validate(0);
  return c;
}

NetConfig load_net_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(error_kind::io, "cannot open net config " + path.string());
  return parse_net_config(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string net_config_json(const NetConfig& c) {
  json j;
  j["widths"] = c.widths;
  j["encoding"] = to_string(c.encoding);
  j["quantized_layers"] = c.quantized_layers;
  j["quantizer"] = {{"sigma_min", c.quantizer.sigma_min}, {"sigma_max", c.quantizer.sigma_max}, {"bins", c.quantizer.bins}};
  j["seed"] = c.seed;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  return j.dump();
}

QuantizedNet::QuantizedNet(NetConfig config) : config_(std::move(config)) {
  config_.validate(0);
  RandomStream rng(config_.seed);
  for (std::size_t l = 0; l + 1 < config_.widths.size(); ++l) {
    const int in = config_.widths[l];
    const int out = config_.widths[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = (2 * rng.uniform() - 1) * limit;
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

ForwardPass QuantizedNet::forward(const Eigen::MatrixXd& inputs, ForwardMode mode, RandomStream* rng,
                                  ClampCounter* counter) const {
  if (inputs.rows() != config_.widths.front()) {
    fail(error_kind::invalid_argument, "input has " + std::to_string(inputs.rows()) + " features, network expects " +
                                           std::to_string(config_.widths.front()));
  }
  if (mode == ForwardMode::train && !rng) fail(error_kind::invalid_argument, "train-mode forward needs a random stream");
  ForwardPass pass;
  Eigen::MatrixXd a = inputs;
  const int hidden = config_.hidden_layers();
  for (int l = 0; l < hidden; ++l) {
    Eigen::MatrixXd h = ((weights_[l] * a).colwise() + biases_[l]).array().tanh().matrix();
    Eigen::MatrixXd v = h;
    Eigen::MatrixXi levels;
    if (config_.is_quantized(l + 1)) {
      levels.resize(h.rows(), h.cols());
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        for (Eigen::Index r = 0; r < h.rows(); ++r) {
          const int level = mode == ForwardMode::eval ? quantize_level(h(r, c), config_.quantizer, counter)
                                                      : quantize_stochastic_level(h(r, c), config_.quantizer, *rng, counter);
          levels(r, c) = level;
          v(r, c) = level_value(level, config_.quantizer);
        }
      }
    }
    pass.raw.push_back(std::move(h));
    pass.levels.push_back(std::move(levels));
    a = v;
    pass.values.push_back(std::move(v));
  }
  Eigen::MatrixXd z = (weights_[hidden] * a).colwise() + biases_[hidden];
  if (config_.encoding == OutputEncoding::one_hot) {
    const Eigen::RowVectorXd peak = z.colwise().maxCoeff();
    Eigen::MatrixXd e = (z.rowwise() - peak).array().exp().matrix();
    const Eigen::RowVectorXd norm = e.colwise().sum();
    pass.output = e.array().rowwise() / norm.array();
  } else {
    pass.output = (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  return pass;
}

std::vector<int> QuantizedNet::predict(const Eigen::MatrixXd& inputs) const {
  const auto pass = forward(inputs, ForwardMode::eval);
  std::vector<int> out(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index c = 0; c < pass.output.cols(); ++c) {
    if (config_.encoding == OutputEncoding::one_hot) {
      Eigen::Index best = 0;
      pass.output.col(c).maxCoeff(&best);
      out[c] = static_cast<int>(best);
    } else {
      int code = 0;
      for (Eigen::Index b = 0; b < pass.output.rows(); ++b) code |= (pass.output(b, c) > 0.5 ? 1 : 0) << b;
      out[c] = code;
    }
  }
  return out;
}

Dataset synthetic_dataset(int repeats) {
  if (repeats < 1) fail(error_kind::invalid_argument, "synthetic dataset needs at least one repeat");
  Dataset d;
  d.classes = 8;
  d.inputs.resize(6, 64 * repeats);
  for (int r = 0; r < repeats; ++r) {
    for (int p = 0; p < 64; ++p) {
      const int col = r * 64 + p;
      int x[6];
      for (int i = 0; i < 6; ++i) {
        x[i] = (p >> i) & 1;
        d.inputs(i, col) = 2.0 * x[i] - 1.0;
      }
      const int label = ((x[0] & x[1]) << 2) | ((x[2] | x[3]) << 1) | (x[0] + x[4] + x[5] >= 2 ? 1 : 0);
      d.labels.push_back(label);
    }
  }
  return d;
}

NetConfig synthetic_net_config(std::uint64_t seed) {
  NetConfig c;
  c.widths = {6, 16, 5, 5, 8};
  c.encoding = OutputEncoding::one_hot;
  c.quantizer = QuantizerConfig{-1.0, 1.0, 4};
  c.seed = seed;
  return c;
}

Dataset shuffle_labels(const Dataset& data, std::uint64_t seed) {
  Dataset out = data;
  RandomStream rng(seed);
  auto& labels = out.labels;
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
  return out;
}

double accuracy(const QuantizedNet& net, const Dataset& data) {
  const auto pred = net.predict(data.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

EpochDump dump_activations(const QuantizedNet& net, const Dataset& data, int epoch) {
  const auto pass = net.forward(data.inputs, ForwardMode::eval);
  EpochDump dump;
  dump.epoch = epoch;
  const auto& config = net.config();
  for (int l = 1; l <= config.hidden_layers(); ++l) {
    if (!config.is_quantized(l)) continue;
    const auto& levels = pass.levels[l - 1];
    ActivationRecordSet records(static_cast<std::size_t>(levels.rows()));
    records.declared_bins = config.quantizer.bins;
    records.provenance.run = static_cast<std::int64_t>(config.seed);
    records.provenance.epoch = epoch;
    records.provenance.layer = l;
    std::vector<std::int64_t> row(static_cast<std::size_t>(levels.rows()));
    for (Eigen::Index c = 0; c < levels.cols(); ++c) {
      for (Eigen::Index r = 0; r < levels.rows(); ++r) row[r] = levels(r, c);
      records.add(std::to_string(data.labels[c]), row);
    }
    dump.layers.push_back(std::move(records));
    dump.layer_ids.push_back(l);
  }
  return dump;
}

std::string dump_file_name(std::uint64_t seed, int epoch, int layer, RecordFormat format) {
  const char* ext = format == RecordFormat::csv ? ".csv" : format == RecordFormat::jsonl ? ".jsonl" : ".bin";
  return "run" + std::to_string(seed) + "_epoch" + std::to_string(epoch) + "_layer" + std::to_string(layer) + ext;
}

TrainResult train(QuantizedNet& net, const Dataset& data, const TrainOptions& options) {
  const auto& config = net.config();
  check_dataset(config, data);
  if (options.epochs < 0) fail(error_kind::invalid_argument, "epoch count must be nonnegative");

  TrainResult result;
  auto checkpoint = [&](int epoch) {
    if (std::find(options.checkpoints.begin(), options.checkpoints.end(), epoch) == options.checkpoints.end()) return;
    EpochDump dump = dump_activations(net, data, epoch);
    dump.accuracy = accuracy(net, data);
    dump.loss = epoch > 0 ? result.loss_history.back() : std::nan("");
    if (options.dump_dir) {
      std::filesystem::create_directories(*options.dump_dir);
      for (std::size_t i = 0; i < dump.layers.size(); ++i) {
        const auto path = *options.dump_dir / dump_file_name(config.seed, epoch, dump.layer_ids[i], options.dump_format);
        save_records(path, dump.layers[i], options.dump_format);
        result.files.push_back(path);
      }
    }
    result.dumps.push_back(std::move(dump));
  };
  checkpoint(0);

  RandomStream rng(config.seed ^ training_stream_salt);
  ClampCounter clamps;
  const int hidden = config.hidden_layers();
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss_sum = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const double batch = static_cast<double>(idx.size());
      const Eigen::MatrixXd x = gather(data.inputs, idx);
      const Eigen::MatrixXd y = targets_for(config, data.labels, idx);
      const auto pass = net.forward(x, ForwardMode::train, &rng, &clamps);

      Eigen::MatrixXd delta;
      if (config.encoding == OutputEncoding::one_hot) {
        loss_sum -= (y.array() * pass.output.array().max(1e-300).log()).sum();
        delta = (pass.output - y) / batch;
      } else {
        const Eigen::ArrayXXd diff = (pass.output - y).array();
        loss_sum += diff.square().sum();
        delta = (2.0 * diff * pass.output.array() * (1.0 - pass.output.array())).matrix() / batch;
      }
      if (!std::isfinite(loss_sum)) {
        fail(error_kind::divergence, "training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");
      }
      // Straight-through: the quantizer is the identity in the backward pass.
      for (int l = hidden; l >= 0; --l) {
        const Eigen::MatrixXd& input = l == 0 ? x : pass.values[l - 1];
        Eigen::MatrixXd next;
        if (l > 0) {
          next = (net.weights(l).transpose() * delta).array() * (1.0 - pass.raw[l - 1].array().square());
        }
        net.weights(l) -= config.learning_rate * delta * input.transpose();
        net.bias(l) -= config.learning_rate * delta.rowwise().sum();
        delta = std::move(next);
      }
    }
    result.loss_history.push_back(loss_sum / static_cast<double>(n));
    checkpoint(epoch);
  }
  result.final_accuracy = accuracy(net, data);
  result.clamped = clamps.clamped;
  return result;
}

}  // namespace pidc
