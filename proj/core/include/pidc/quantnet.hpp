#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pidc/records.hpp"

namespace pidc {

// ---------------------------------------------------------------- quantizer

struct QuantizerConfig {
  double sigma_min = -1.0;
  double sigma_max = 1.0;
  int bins = 4;

  double epsilon() const { return (sigma_max - sigma_min) / (bins - 1); }
  void validate() const;
};

// Counts inputs clamped into [sigma_min, sigma_max].
struct ClampCounter {
  std::uint64_t clamped = 0;
};

// Nearest grid level index; ties go to the even index.
int quantize_level(double x, const QuantizerConfig& q, ClampCounter* counter = nullptr);
double level_value(int level, const QuantizerConfig& q);
double quantize_deterministic(double x, const QuantizerConfig& q, ClampCounter* counter = nullptr);

// Deterministic stream of uniforms in [0, 1) built from 53 high bits of a
// 64-bit Mersenne twister, so draws are identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Rounds up with probability equal to the fractional part of
// (x - sigma_min) / epsilon, so E[result] = x on the grid's range.
int quantize_stochastic_level(double x, const QuantizerConfig& q, RandomStream& rng,
                              ClampCounter* counter = nullptr);
double quantize_stochastic(double x, const QuantizerConfig& q, RandomStream& rng, ClampCounter* counter = nullptr);

// ------------------------------------------------------------------ network

enum class OutputEncoding { one_hot, binary };
std::string to_string(OutputEncoding e);
OutputEncoding parse_output_encoding(const std::string& name);

struct NetConfig {
  std::vector<int> widths{6, 16, 5, 5, 8};  // input, hidden..., output
  OutputEncoding encoding = OutputEncoding::one_hot;
  std::vector<int> quantized_layers;         // hidden layers, 1-based; empty = all hidden
  QuantizerConfig quantizer;
  std::uint64_t seed = 1;
  int batch_size = 64;
  double learning_rate = 0.01;

  int hidden_layers() const { return static_cast<int>(widths.size()) - 2; }
  bool is_quantized(int hidden_layer) const;
  void validate(int classes) const;
};

NetConfig load_net_config(const std::filesystem::path& path);
NetConfig parse_net_config(const std::string& json_text);
std::string net_config_json(const NetConfig& config);

enum class ForwardMode { train, eval };

struct ForwardPass {
  // Per hidden layer (columns are samples): tanh output before quantization,
  // the value passed on, and the level indices (quantized layers only).
  std::vector<Eigen::MatrixXd> raw;
  std::vector<Eigen::MatrixXd> values;
  std::vector<Eigen::MatrixXi> levels;
  Eigen::MatrixXd output;  // softmax (one-hot) or sigmoid (binary)
};

class QuantizedNet {
 public:
  explicit QuantizedNet(NetConfig config);

  const NetConfig& config() const { return config_; }
  // weights(l) maps layer l to l+1 (0 = input).
  const Eigen::MatrixXd& weights(int l) const { return weights_.at(l); }
  const Eigen::VectorXd& bias(int l) const { return biases_.at(l); }
  Eigen::MatrixXd& weights(int l) { return weights_.at(l); }
  Eigen::VectorXd& bias(int l) { return biases_.at(l); }

  // inputs: features x samples.  Train mode needs a random stream.
  ForwardPass forward(const Eigen::MatrixXd& inputs, ForwardMode mode, RandomStream* rng = nullptr,
                      ClampCounter* counter = nullptr) const;
  std::vector<int> predict(const Eigen::MatrixXd& inputs) const;

 private:
  NetConfig config_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

struct Dataset {
  Eigen::MatrixXd inputs;  // features x samples
  std::vector<int> labels;
  int classes = 0;

  std::size_t size() const { return labels.size(); }
};

// Labels are 3-bit functions of 6 binary inputs coded as -1/+1:
// (x1 and x2, x3 or x4, majority(x1, x5, x6)) read as a binary number.
// Each of the 64 patterns appears `repeats` times.
Dataset synthetic_dataset(int repeats = 64);
NetConfig synthetic_net_config(std::uint64_t seed);

// Copy whose label vector is permuted across samples by a seeded shuffle, so
// every sample gets a fixed random label and the label histogram is kept.
Dataset shuffle_labels(const Dataset& data, std::uint64_t seed);

struct TrainOptions {
  int epochs = 100;
  std::vector<int> checkpoints;  // epochs at which to dump; 0 = before training
  std::optional<std::filesystem::path> dump_dir;  // one file per layer per checkpoint
  RecordFormat dump_format = RecordFormat::csv;
};

struct EpochDump {
  int epoch = 0;
  double accuracy = 0;
  double loss = 0;
  std::vector<ActivationRecordSet> layers;  // quantized hidden layers, 1-based order
  std::vector<int> layer_ids;
};

struct TrainResult {
  std::vector<EpochDump> dumps;
  std::vector<double> loss_history;
  double final_accuracy = 0;
  std::uint64_t clamped = 0;
  std::vector<std::filesystem::path> files;
};

double accuracy(const QuantizedNet& net, const Dataset& data);
// Eval-mode level indices of every quantized hidden layer.
EpochDump dump_activations(const QuantizedNet& net, const Dataset& data, int epoch);

// SGD with stochastic-rounding forward passes and straight-through
// gradients.  Throws error_kind::divergence on a non-finite loss.
TrainResult train(QuantizedNet& net, const Dataset& data, const TrainOptions& options);

std::string dump_file_name(std::uint64_t seed, int epoch, int layer, RecordFormat format = RecordFormat::csv);

// ---------------------------------------------------------------------- IDX

struct IdxArray {
  std::uint8_t type = 0;  // 0x08 unsigned byte
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

IdxArray read_idx(std::istream& in, const std::string& name);
IdxArray load_idx(const std::filesystem::path& path);
// Images flattened to features x samples with pixels scaled to [0, 1].
Eigen::MatrixXd idx_images(const IdxArray& images);
std::vector<int> idx_labels(const IdxArray& labels);
Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                         std::optional<std::size_t> max_samples = std::nullopt);

}  // namespace pidc
