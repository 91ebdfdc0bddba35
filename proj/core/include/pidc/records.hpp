#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pidc {

enum class RecordFormat { csv, jsonl, binary };

RecordFormat parse_record_format(const std::string& name);
std::string to_string(RecordFormat format);
// .csv / .jsonl / .bin; anything else is a parse error.
RecordFormat record_format_from_path(const std::filesystem::path& path);

struct Provenance {
  std::string source;
  std::optional<std::int64_t> run;
  std::optional<int> epoch;
  std::optional<int> layer;
};

// Rows of (label, integer activation vector) with uniform arity.
class ActivationRecordSet {
 public:
  explicit ActivationRecordSet(std::size_t arity) : arity_(arity) {}

  void add(std::string label, std::span<const std::int64_t> activations);

  std::size_t arity() const { return arity_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::string& label(std::size_t row) const { return labels_[row]; }
  std::span<const std::int64_t> activations(std::size_t row) const {
    return std::span<const std::int64_t>(values_).subspan(row * arity_, arity_);
  }

  Provenance provenance;
  // Set when activations are known bin indices 0..bins-1 (quantnet dumps).
  std::optional<int> declared_bins;

 private:
  std::size_t arity_;
  std::vector<std::string> labels_;
  std::vector<std::int64_t> values_;
};

ActivationRecordSet load_records(const std::filesystem::path& path, RecordFormat format);
ActivationRecordSet read_records(std::istream& in, RecordFormat format, const std::string& source_name);

// CSV: header "label,s1,...,sn".  JSONL: {"label": ..., "s": [...]} per line.
void write_records(std::ostream& out, const ActivationRecordSet& records, RecordFormat format);
void save_records(const std::filesystem::path& path, const ActivationRecordSet& records, RecordFormat format);

// Binary activation dump, little-endian:
//   char[4] "QNAD", u32 version (=1), u32 arity, u32 bins (0 = undeclared), u64 rows,
//   then per row: i32 label, arity x u8 bin index.
inline constexpr char binary_dump_magic[4] = {'Q', 'N', 'A', 'D'};
inline constexpr std::uint32_t binary_dump_version = 1;

}  // namespace pidc
