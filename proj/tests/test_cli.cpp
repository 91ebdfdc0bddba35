#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "pidc/records.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pidc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = pidc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json strip_timing(json report) {
  report["manifest"].erase("timing");
  return report;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pidc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// T = parity of three bits, each row once.
std::string parity_csv() {
  std::string s = "label,s1,s2,s3\n";
  for (int x = 0; x < 8; ++x) {
    const int a = x & 1, b = (x >> 1) & 1, c = (x >> 2) & 1;
    s += std::to_string(a ^ b ^ c) + "," + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "\n";
  }
  return s;
}

std::string wide_csv(int n) {
  std::string s = "label";
  for (int i = 1; i <= n; ++i) s += ",s" + std::to_string(i);
  s += "\n";
  for (int r = 0; r < 16; ++r) {
    s += std::to_string(r % 3);
    for (int i = 0; i < n; ++i) s += "," + std::to_string((r >> (i % 4)) & 1);
    s += "\n";
  }
  return s;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value) {
      setenv("PID_MAX_SOURCES", value, 1);
    } else {
      unsetenv("PID_MAX_SOURCES");
    }
  }
  ~EnvGuard() { unsetenv("PID_MAX_SOURCES"); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("analyze a record file") {
    const auto dir = scratch_dir("analyze");
    write_file(dir / "parity.csv", parity_csv());
    const auto r = invoke({"analyze", "--input", (dir / "parity.csv").string()});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(std::abs(j["complexity"].get<double>() - 2.0524674198941355) < 1e-12);
    CHECK(j["total_mi_bits"].get<double>() == doctest::Approx(1.0));
    CHECK(j["manifest"]["command"] == "analyze");
    CHECK(j["manifest"]["inputs"][0]["sha256"].get<std::string>().size() == 64);
    CHECK(j["manifest"].contains("timing"));
    fs::remove_all(dir);
  }

  TEST_CASE("reports are deterministic apart from timing") {
    const auto dir = scratch_dir("determinism");
    write_file(dir / "parity.csv", parity_csv());
    const auto a = invoke({"analyze", "--input", (dir / "parity.csv").string(), "--per-label"});
    const auto b = invoke({"analyze", "--input", (dir / "parity.csv").string(), "--per-label"});
    CHECK(strip_timing(json::parse(a.out)).dump() == strip_timing(json::parse(b.out)).dump());
    fs::remove_all(dir);
  }

  TEST_CASE("analyze a toy case") {
    const auto r = invoke({"analyze", "--toy", "xor8x2"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["complexity"].get<double>() == doctest::Approx(1.89).epsilon(0.006));
  }

  TEST_CASE("exit codes") {
    const auto dir = scratch_dir("exits");
    write_file(dir / "six.csv", wide_csv(6));
    write_file(dir / "flat.csv", "label,s1\n0,1\n1,1\n");
    write_file(dir / "broken.csv", "label,s1\n0,x\n");

    const auto six = invoke({"analyze", "--input", (dir / "six.csv").string()});
    CHECK(six.code == 4);
    CHECK(six.err.find("--coarse") != std::string::npos);
    CHECK(six.err.find("--subsample") != std::string::npos);

    CHECK(invoke({"analyze", "--input", (dir / "flat.csv").string()}).code == 3);
    CHECK(invoke({"analyze", "--input", (dir / "broken.csv").string()}).code == 2);
    CHECK(invoke({"analyze", "--bogus"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"toy", "nope"}).code != 0);
    CHECK(invoke({"analyze", "--input", (dir / "missing.csv").string()}).code == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("reduction flags lift the size guard") {
    const auto dir = scratch_dir("reduce");
    write_file(dir / "six.csv", wide_csv(6));
    const auto path = (dir / "six.csv").string();
    const auto c = invoke({"analyze", "--input", path, "--uniform-d", "2"});
    REQUIRE(c.code == 0);
    CHECK(json::parse(c.out)["reduction"]["mode"] == "coarse-grain");
    const auto s = invoke({"analyze", "--input", path, "--subsample", "1,2,3"});
    REQUIRE(s.code == 0);
    CHECK(json::parse(s.out)["reduction"].contains("warning"));
    const auto cg = invoke({"coarse", "--input", path, "--map", "1,1,2,2,3,3"});
    CHECK(cg.code == 0);
    const auto rs = invoke({"subsample", "--input", path, "--random", "3", "--draws", "4", "--seed", "5"});
    CHECK(rs.code == 0);
    const auto rs2 = invoke({"subsample", "--input", path, "--random", "3", "--draws", "4", "--seed", "5"});
    CHECK(strip_timing(json::parse(rs.out)).dump() == strip_timing(json::parse(rs2.out)).dump());
    fs::remove_all(dir);
  }

  TEST_CASE("PID_MAX_SOURCES") {
    const auto dir = scratch_dir("env");
    write_file(dir / "parity.csv", parity_csv());
    const auto path = (dir / "parity.csv").string();
    {
      EnvGuard g("2");
      CHECK(invoke({"analyze", "--input", path}).code == 4);
    }
    {
      EnvGuard g("abc");
      CHECK(invoke({"analyze", "--input", path}).code == 2);
    }
    {
      EnvGuard g("7");
      CHECK(invoke({"analyze", "--input", path}).code == 4);
    }
    {
      EnvGuard g("3");
      CHECK(invoke({"analyze", "--input", path}).code == 0);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("toy command") {
    const auto r = invoke({"toy", "onehot4", "paired-binary", "binary10"});
    CHECK(r.code == 0);
    CHECK(r.out.find("paired-binary") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
  }

  TEST_CASE("lattice command") {
    const auto r = invoke({"lattice", "--n", "3"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["count"] == 18);
    CHECK(invoke({"lattice", "--n", "6"}).code == 4);
  }

  TEST_CASE("reing command") {
    const auto r = invoke({"reing", "--toy", "paired-binary", "--compare"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["c_reing"].get<double>() == doctest::Approx(5.0 / 3));
  }

  TEST_CASE("rational flag") {
    const auto a = json::parse(invoke({"analyze", "--toy", "onehot4"}).out);
    CHECK(invoke({"--rational", "analyze", "--toy", "onehot4"}).code == 4);
    const auto b = json::parse(invoke({"--rational", "analyze", "--toy", "xor8x2"}).out);
    const auto c = json::parse(invoke({"analyze", "--toy", "xor8x2"}).out);
    CHECK(b["complexity"].get<double>() == doctest::Approx(c["complexity"].get<double>()).epsilon(1e-12));
    CHECK(b["meta"]["mode"] == "rational");
    CHECK(a["meta"]["mode"] == "automatic");
  }

  TEST_CASE("train and sweep") {
    const auto dir = scratch_dir("sweep");
    const auto dumps = (dir / "dumps").string();
    const auto t = invoke({"train", "--dump-dir", dumps, "--epochs", "2", "--checkpoints", "0,1,2", "--repeats", "2",
                           "--seed", "3", "--out", (dir / "train.json").string()});
    REQUIRE(t.code == 0);
    // keep two of the three layers
    for (const auto& e : fs::directory_iterator(dumps)) {
      if (e.path().filename().string().find("layer1") != std::string::npos) fs::remove(e.path());
    }
    const auto a = invoke({"sweep", "--dump-dir", dumps, "--threads", "2"});
    REQUIRE(a.code == 0);
    std::istringstream lines(a.out);
    std::string header, line;
    std::getline(lines, header);
    CHECK(header.rfind("run,epoch,layer,n,mi_bits,complexity,multiplicity,backbone_1", 0) == 0);
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 6);
    const auto b = invoke({"sweep", "--dump-dir", dumps});
    CHECK(a.out == b.out);

    write_file(fs::path(dumps) / "notes.txt", "x");
    write_file(fs::path(dumps) / "run3_epoch9_layer2.csv", "garbage\n");
    const auto partial = invoke({"sweep", "--dump-dir", dumps, "--out", (dir / "table.csv").string()});
    CHECK(partial.code == 5);
    CHECK(fs::exists(dir / "table.csv.manifest.json"));

    const auto empty = scratch_dir("sweep_empty");
    CHECK(invoke({"sweep", "--dump-dir", empty.string()}).code != 0);
    fs::remove_all(empty);
    fs::remove_all(dir);
  }

  TEST_CASE("train is reproducible") {
    const auto dir = scratch_dir("train_repro");
    for (const char* sub : {"a", "b"}) {
      const auto r = invoke({"train", "--dump-dir", (dir / sub).string(), "--epochs", "2", "--checkpoints", "2",
                             "--repeats", "2", "--seed", "8", "--out", (dir / (std::string(sub) + ".json")).string()});
      REQUIRE(r.code == 0);
    }
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      CHECK(read_file(e.path()) == read_file(dir / "b" / e.path().filename()));
    }
    fs::remove_all(dir);
  }
}
