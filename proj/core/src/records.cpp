#include "pidc/records.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "pidc/error.hpp"

namespace pidc {

namespace {

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

bool parse_int64(std::string_view tok, std::int64_t& out) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

ActivationRecordSet read_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<ActivationRecordSet> records;
  std::vector<std::int64_t> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (!records) {
      if (trim(fields[0]) != "label" || fields.size() < 2) {
        fail(error_kind::parse, at_line(source, line_no) + "expected header 'label,s1,...,sn'");
      }
      for (std::size_t j = 1; j < fields.size(); ++j) {
        if (trim(fields[j]) != "s" + std::to_string(j)) {
          fail(error_kind::parse, at_line(source, line_no) + "header column " + std::to_string(j + 1) +
                                      " should be 's" + std::to_string(j) + "'");
        }
      }
      records.emplace(fields.size() - 1);
      continue;
    }
    if (fields.size() != records->arity() + 1) {
      fail(error_kind::parse, at_line(source, line_no) + "expected " + std::to_string(records->arity() + 1) +
                                  " fields, found " + std::to_string(fields.size()));
    }
    const std::string label = trim(fields[0]);
    if (label.empty()) fail(error_kind::parse, at_line(source, line_no) + "empty label");
    row.clear();
    for (std::size_t j = 1; j < fields.size(); ++j) {
      std::int64_t v = 0;
      if (!parse_int64(fields[j], v)) {
        fail(error_kind::parse, at_line(source, line_no) + "activation '" + trim(fields[j]) + "' is not an integer");
      }
      row.push_back(v);
    }
    records->add(label, row);
  }
  if (!records) fail(error_kind::parse, source + ": empty file");
  if (records->empty()) fail(error_kind::parse, source + ": no records");
  return std::move(*records);
}

ActivationRecordSet read_jsonl(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<ActivationRecordSet> records;
  std::vector<std::int64_t> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(error_kind::parse, at_line(source, line_no) + "invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("label") || !j.contains("s") || !j["s"].is_array()) {
      fail(error_kind::parse, at_line(source, line_no) + "expected {\"label\": ..., \"s\": [...]}");
    }
    const auto& lab = j["label"];
    std::string label;
    if (lab.is_string()) {
      label = lab.get<std::string>();
    } else if (lab.is_number_integer()) {
      label = std::to_string(lab.get<std::int64_t>());
    } else {
      fail(error_kind::parse, at_line(source, line_no) + "label must be a string or integer");
    }
    row.clear();
    for (const auto& v : j["s"]) {
      if (!v.is_number_integer()) {
        fail(error_kind::parse, at_line(source, line_no) + "activation " + v.dump() + " is not an integer");
      }
      row.push_back(v.get<std::int64_t>());
    }
    if (!records) {
      if (row.empty()) fail(error_kind::parse, at_line(source, line_no) + "row has no activations");
      records.emplace(row.size());
    } else if (row.size() != records->arity()) {
      fail(error_kind::parse, at_line(source, line_no) + "arity " + std::to_string(row.size()) +
                                  " differs from first row's " + std::to_string(records->arity()));
    }
    records->add(label, row);
  }
  if (!records) fail(error_kind::parse, source + ": empty file");
  return std::move(*records);
}

template <class T>
T read_le(std::istream& in, const std::string& source, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    fail(error_kind::parse, source + ": truncated binary dump while reading " + what);
  }
  std::make_unsigned_t<T> v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

template <class T>
void write_le(std::ostream& out, T value) {
  auto v = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

ActivationRecordSet read_binary(std::istream& in, const std::string& source) {
  char magic[4];
  if (!in.read(magic, 4)) fail(error_kind::parse, source + ": empty file");
  if (!std::equal(magic, magic + 4, binary_dump_magic)) fail(error_kind::parse, source + ": bad binary dump magic");
  const auto version = read_le<std::uint32_t>(in, source, "version");
  if (version != binary_dump_version) {
    fail(error_kind::parse, source + ": unsupported binary dump version " + std::to_string(version));
  }
  const auto arity = read_le<std::uint32_t>(in, source, "arity");
  const auto bins = read_le<std::uint32_t>(in, source, "bins");
  const auto rows = read_le<std::uint64_t>(in, source, "row count");
  if (arity == 0) fail(error_kind::parse, source + ": zero arity");
  if (rows == 0) fail(error_kind::parse, source + ": no records");
  ActivationRecordSet records(arity);
  if (bins != 0) records.declared_bins = static_cast<int>(bins);
  std::vector<std::int64_t> row(arity);
  std::vector<unsigned char> raw(arity);
  for (std::uint64_t r = 0; r < rows; ++r) {
    const auto label = read_le<std::int32_t>(in, source, "label");
    if (!in.read(reinterpret_cast<char*>(raw.data()), arity)) {
      fail(error_kind::parse, source + ": truncated binary dump at row " + std::to_string(r));
    }
    for (std::uint32_t j = 0; j < arity; ++j) {
      if (bins != 0 && raw[j] >= bins) {
        fail(error_kind::parse, source + ": row " + std::to_string(r) + " bin " + std::to_string(raw[j]) +
                                    " outside declared " + std::to_string(bins) + " levels");
      }
      row[j] = raw[j];
    }
    records.add(std::to_string(label), row);
  }
  return records;
}

}  // namespace

RecordFormat parse_record_format(const std::string& name) {
  if (name == "csv") return RecordFormat::csv;
  if (name == "jsonl") return RecordFormat::jsonl;
  if (name == "binary" || name == "bin") return RecordFormat::binary;
  fail(error_kind::parse, "unknown record format '" + name + "'");
}

std::string to_string(RecordFormat format) {
  switch (format) {
    case RecordFormat::csv:
      return "csv";
    case RecordFormat::jsonl:
      return "jsonl";
    case RecordFormat::binary:
      return "binary";
  }
  return "?";
}

RecordFormat record_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return RecordFormat::csv;
  if (ext == ".jsonl") return RecordFormat::jsonl;
  if (ext == ".bin") return RecordFormat::binary;
  fail(error_kind::parse, "cannot infer record format from '" + path.string() + "'; pass --format");
}

void ActivationRecordSet::add(std::string label, std::span<const std::int64_t> activations) {
  if (activations.size() != arity_) {
    fail(error_kind::invalid_argument, "record arity " + std::to_string(activations.size()) + " != " +
                                           std::to_string(arity_));
  }
  labels_.push_back(std::move(label));
  values_.insert(values_.end(), activations.begin(), activations.end());
}

ActivationRecordSet read_records(std::istream& in, RecordFormat format, const std::string& source_name) {
  ActivationRecordSet records = [&] {
    switch (format) {
      case RecordFormat::csv:
        return read_csv(in, source_name);
      case RecordFormat::jsonl:
        return read_jsonl(in, source_name);
      case RecordFormat::binary:
        return read_binary(in, source_name);
    }
    fail(error_kind::parse, "unknown record format");
  }();
  records.provenance.source = source_name;
  return records;
}

ActivationRecordSet load_records(const std::filesystem::path& path, RecordFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(error_kind::io, "cannot open " + path.string());
  return read_records(in, format, path.string());
}

void write_records(std::ostream& out, const ActivationRecordSet& records, RecordFormat format) {
  switch (format) {
    case RecordFormat::csv: {
      out << "label";
      for (std::size_t j = 1; j <= records.arity(); ++j) out << ",s" << j;
      out << '\n';
      for (std::size_t r = 0; r < records.size(); ++r) {
        out << records.label(r);
        for (auto v : records.activations(r)) out << ',' << v;
        out << '\n';
      }
      break;
    }
    case RecordFormat::jsonl: {
      for (std::size_t r = 0; r < records.size(); ++r) {
        nlohmann::json j;
        std::int64_t numeric = 0;
        if (parse_int64(records.label(r), numeric)) {
          j["label"] = numeric;
        } else {
          j["label"] = records.label(r);
        }
        j["s"] = std::vector<std::int64_t>(records.activations(r).begin(), records.activations(r).end());
        out << j.dump() << '\n';
      }
      break;
    }
    case RecordFormat::binary: {
      out.write(binary_dump_magic, 4);
      write_le<std::uint32_t>(out, binary_dump_version);
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(records.arity()));
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(records.declared_bins.value_or(0)));
      write_le<std::uint64_t>(out, records.size());
      for (std::size_t r = 0; r < records.size(); ++r) {
        std::int64_t label = 0;
        if (!parse_int64(records.label(r), label)) {
          fail(error_kind::invalid_argument, "binary dumps need integer labels, got '" + records.label(r) + "'");
        }
        write_le<std::int32_t>(out, static_cast<std::int32_t>(label));
        for (auto v : records.activations(r)) {
          if (v < 0 || v > 255) fail(error_kind::invalid_argument, "binary dumps hold bins 0..255");
          out.put(static_cast<char>(v));
        }
      }
      break;
    }
  }
}

void save_records(const std::filesystem::path& path, const ActivationRecordSet& records, RecordFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(error_kind::io, "cannot write " + path.string());
  write_records(out, records, format);
}

}  // namespace pidc
