#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "cli.hpp"

#ifndef PIDC_VERSION
#define PIDC_VERSION "unknown"
#endif

namespace pidc::cli {

int exit_code_for(error_kind kind) {
  switch (kind) {
    case error_kind::parse:
    case error_kind::invalid_argument:
      return exit_parse;
    case error_kind::undefined_complexity:
      return exit_undefined;
    case error_kind::size_limit:
      return exit_size_limit;
    default:
      return exit_failure;
  }
}

std::string tool_version() { return PIDC_VERSION; }

std::string sha256_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(error_kind::io, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(error_kind::io, "sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void RunManifest::add_input(const std::filesystem::path& path) { inputs.emplace_back(path.string(), sha256_hex(path)); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"sha256", digest}});
  return {{"command", command},
          {"options", options},
          {"inputs", std::move(in)},
          {"seeds", seeds},
          {"tolerance", tolerance},
          {"version", tool_version()},
          {"timing", {{"started_utc", started_utc}, {"wall_clock_seconds", wall_clock_seconds}}}};
}

}  // namespace pidc::cli
