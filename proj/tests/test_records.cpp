#include <doctest.h>

#include <sstream>

#include "pidc/error.hpp"
#include "pidc/records.hpp"

using namespace pidc;

namespace {

ActivationRecordSet parse(const std::string& text, RecordFormat format) {
  std::istringstream in(text);
  return read_records(in, format, "mem");
}

std::string kind_of(const std::string& text, RecordFormat format) {
  try {
    parse(text, format);
  } catch (const error& e) {
    return e.kind() == error_kind::parse ? "parse" : "other";
  }
  return "none";
}

}  // namespace

TEST_SUITE("records") {
  TEST_CASE("csv round trip") {
    const auto r = parse("label,s1,s2\n0,1,-2\ncat,3,4\r\n\n", RecordFormat::csv);
    REQUIRE(r.size() == 2);
    CHECK(r.arity() == 2);
    CHECK(r.label(1) == "cat");
    CHECK(r.activations(0)[1] == -2);
    std::ostringstream out;
    write_records(out, r, RecordFormat::csv);
    CHECK(out.str() == "label,s1,s2\n0,1,-2\ncat,3,4\n");
  }

  TEST_CASE("csv errors") {
    CHECK(kind_of("", RecordFormat::csv) == "parse");
    CHECK(kind_of("label,s1\n", RecordFormat::csv) == "parse");
    CHECK(kind_of("lab,s1\n0,1\n", RecordFormat::csv) == "parse");
    CHECK(kind_of("label,s2\n0,1\n", RecordFormat::csv) == "parse");
    CHECK(kind_of("label,s1\n0,1,2\n", RecordFormat::csv) == "parse");
    CHECK(kind_of("label,s1\n0,x\n", RecordFormat::csv) == "parse");
    CHECK(kind_of("label,s1\n0,1.5\n", RecordFormat::csv) == "parse");
    CHECK(kind_of("label,s1\n,1\n", RecordFormat::csv) == "parse");
  }

  TEST_CASE("csv error messages carry the line") {
    try {
      parse("label,s1\n0,1\n0,bad\n", RecordFormat::csv);
      FAIL("expected an error");
    } catch (const error& e) {
      CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
  }

  TEST_CASE("jsonl round trip") {
    const auto r = parse("{\"label\": 3, \"s\": [0, 1]}\n{\"label\": \"x\", \"s\": [2, 2]}\n", RecordFormat::jsonl);
    REQUIRE(r.size() == 2);
    CHECK(r.label(0) == "3");
    CHECK(r.label(1) == "x");
    std::ostringstream out;
    write_records(out, r, RecordFormat::jsonl);
    CHECK(out.str() == "{\"label\":3,\"s\":[0,1]}\n{\"label\":\"x\",\"s\":[2,2]}\n");
  }

  TEST_CASE("jsonl errors") {
    CHECK(kind_of("{\"label\": 1, \"s\": [0]}\n{\"label\": 1, \"s\": [0, 1]}\n", RecordFormat::jsonl) == "parse");
    CHECK(kind_of("{\"label\": 1}\n", RecordFormat::jsonl) == "parse");
    CHECK(kind_of("{\"label\": 1, \"s\": [0.5]}\n", RecordFormat::jsonl) == "parse");
    CHECK(kind_of("{\"label\": [1], \"s\": [0]}\n", RecordFormat::jsonl) == "parse");
    CHECK(kind_of("not json\n", RecordFormat::jsonl) == "parse");
    CHECK(kind_of("{\"label\": 1, \"s\": []}\n", RecordFormat::jsonl) == "parse");
  }

  TEST_CASE("binary round trip") {
    ActivationRecordSet r(3);
    const std::int64_t a[] = {0, 1, 3};
    const std::int64_t b[] = {2, 2, 0};
    r.add("7", a);
    r.add("-1", b);
    r.declared_bins = 4;
    std::ostringstream out(std::ios::binary);
    write_records(out, r, RecordFormat::binary);
    const std::string bytes = out.str();
    CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + 2 * (4 + 3));
    CHECK(bytes.substr(0, 4) == "QNAD");
    const auto back = parse(bytes, RecordFormat::binary);
    CHECK(back.size() == 2);
    CHECK(back.label(1) == "-1");
    CHECK(back.activations(0)[2] == 3);
    CHECK(back.declared_bins == 4);

    CHECK(kind_of(bytes.substr(0, bytes.size() - 1), RecordFormat::binary) == "parse");
    CHECK(kind_of("QNAX" + bytes.substr(4), RecordFormat::binary) == "parse");
    std::string out_of_range = bytes;
    out_of_range.back() = 9;
    CHECK(kind_of(out_of_range, RecordFormat::binary) == "parse");
  }

  TEST_CASE("binary writer rejects non-integer labels and large bins") {
    ActivationRecordSet r(1);
    const std::int64_t v[] = {1};
    r.add("cat", v);
    std::ostringstream out;
    CHECK_THROWS_AS(write_records(out, r, RecordFormat::binary), error);
    ActivationRecordSet big(1);
    const std::int64_t w[] = {256};
    big.add("1", w);
    CHECK_THROWS_AS(write_records(out, big, RecordFormat::binary), error);
  }

  TEST_CASE("formats by name and extension") {
    CHECK(parse_record_format("csv") == RecordFormat::csv);
    CHECK(parse_record_format("jsonl") == RecordFormat::jsonl);
    CHECK_THROWS_AS(parse_record_format("xml"), error);
    CHECK(record_format_from_path("a/b.jsonl") == RecordFormat::jsonl);
    CHECK(record_format_from_path("x.bin") == RecordFormat::binary);
    CHECK_THROWS_AS(record_format_from_path("x.txt"), error);
  }

  TEST_CASE("arity is enforced on add") {
    ActivationRecordSet r(2);
    const std::int64_t v[] = {1};
    CHECK_THROWS_AS(r.add("0", v), error);
  }

  TEST_CASE("missing file is an io error") {
    try {
      load_records("/nonexistent/file.csv", RecordFormat::csv);
      FAIL("expected an error");
    } catch (const error& e) {
      CHECK(e.kind() == error_kind::io);
    }
  }
}
