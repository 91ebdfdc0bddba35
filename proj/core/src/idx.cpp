#include <fstream>
#include <limits>

#include "pidc/error.hpp"
#include "pidc/quantnet.hpp"

namespace pidc {

namespace {

constexpr std::uint32_t label_magic = 0x00000801;
constexpr std::uint32_t image_magic = 0x00000803;

std::uint32_t read_be32(std::istream& in, const std::string& name, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(error_kind::parse, name + ": truncated header (" + what + ")");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

}  // namespace

IdxArray read_idx(std::istream& in, const std::string& name) {
  const std::uint32_t magic = read_be32(in, name, "magic");
  if (magic != label_magic && magic != image_magic) {
    char buf[11];
    std::snprintf(buf, sizeof buf, "0x%08x", magic);
    fail(error_kind::parse, name + ": bad magic " + buf + " (expected 0x00000801 or 0x00000803)");
  }
  IdxArray out;
  out.type = static_cast<std::uint8_t>((magic >> 8) & 0xff);
  const std::uint32_t rank = magic & 0xff;
  std::uint64_t count = 1;
  for (std::uint32_t d = 0; d < rank; ++d) {
    const std::uint32_t size = read_be32(in, name, "dimension");
    out.dims.push_back(size);
    if (size != 0 && count > std::numeric_limits<std::uint64_t>::max() / size) {
      fail(error_kind::parse, name + ": dimension product overflows");
    }
    count *= size;
  }
  if (count > (std::uint64_t{1} << 34)) fail(error_kind::parse, name + ": payload of " + std::to_string(count) + " bytes is too large");
  out.data.resize(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(out.data.data()), static_cast<std::streamsize>(count));
  const auto got = static_cast<std::uint64_t>(in.gcount());
  if (got != count) {
    fail(error_kind::parse, name + ": truncated payload, expected " + std::to_string(count) + " bytes, got " +
                                std::to_string(got));
  }
  return out;
}

IdxArray load_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(error_kind::io, "cannot open " + path.string());
  return read_idx(in, path.string());
}

Eigen::MatrixXd idx_images(const IdxArray& images) {
  if (images.dims.size() != 3) fail(error_kind::parse, "image file must have 3 dimensions");
  const Eigen::Index samples = images.dims[0];
  const Eigen::Index features = static_cast<Eigen::Index>(images.dims[1]) * images.dims[2];
  Eigen::MatrixXd out(features, samples);
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (Eigen::Index f = 0; f < features; ++f) out(f, s) = images.data[s * features + f] / 255.0;
  }
  return out;
}

std::vector<int> idx_labels(const IdxArray& labels) {
  if (labels.dims.size() != 1) fail(error_kind::parse, "label file must have 1 dimension");
  std::vector<int> out(labels.data.begin(), labels.data.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] > 9) {
      fail(error_kind::parse, "label " + std::to_string(out[i]) + " at index " + std::to_string(i) + " exceeds 9");
    }
  }
  return out;
}

Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                         std::optional<std::size_t> max_samples) {
  Eigen::MatrixXd x = idx_images(load_idx(images));
  std::vector<int> y = idx_labels(load_idx(labels));
  if (static_cast<std::size_t>(x.cols()) != y.size()) {
    fail(error_kind::parse, "image count " + std::to_string(x.cols()) + " does not match label count " +
                                std::to_string(y.size()));
  }
  if (max_samples && *max_samples < y.size()) {
    y.resize(*max_samples);
    x.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(*max_samples));
  }
  Dataset d;
  d.inputs = std::move(x);
  d.labels = std::move(y);
  d.classes = 10;
  return d;
}

}  // namespace pidc
