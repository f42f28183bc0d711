#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"

#include "citedyn/cli.hpp"
#include "citedyn/corpus.hpp"
#include "citedyn/serialize.hpp"
#include "reference_tables.hpp"

namespace fs = std::filesystem;
using namespace citedyn;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("citedyn_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Noiseless astro-ph panel at dataset year 2019.
fs::path astro_panel() {
  const auto path = scratch() / "panel.csv";
  if (fs::exists(path)) return path;
  AgePanel p;
  p.discipline = "astro-ph";
  p.dataset_year = 2019;
  const auto params = reference::kTable2[0].params();
  for (int a = 0; a <= 20; ++a) {
    const std::int64_t n = 1000000;
    const auto total = static_cast<std::int64_t>(std::llround(eval_history(params, a) * n));
    p.entries.push_back({a, static_cast<double>(total) / n, n, total});
  }
  std::ofstream out(path);
  const std::vector<AgePanel> panels = {p};
  write_panel_csv(out, panels);
  return path;
}

fs::path astro_fit() {
  const auto path = scratch() / "fit.json";
  if (fs::exists(path)) return path;
  const auto r = run({"fit-history", "--input", astro_panel().string(), "--discipline", "astro-ph",
                      "--cap", "0.99", "--max-age", "20", "--out", path.string()});
  REQUIRE(r.code == 0);
  return path;
}

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"no-such-command"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
  const auto v = run({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find("1.0.0") != std::string::npos);
  CHECK(run({"fit-history"}).code == kExitUsage);
}

TEST_CASE("data errors") {
  const auto bad = scratch() / "bad.csv";
  std::ofstream(bad) << "eprint_id,discipline,submit_year,age,citations_in_year\nx,hep,2010,0,-1\n";
  const auto r = run({"ingest", "--input", bad.string()});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(run({"ingest", "--input", (scratch() / "missing.csv").string()}).code == kExitData);
}

TEST_CASE("fit-history recovers the generating parameters") {
  const auto env = read_json_file(astro_fit().string());
  CHECK(env["schema"] == kResultSchema);
  CHECK(env["subcommand"] == "fit-history");
  const auto fits = fits_from_json(env);
  REQUIRE(fits.size() == 1);
  const auto& got = fits[0].second;
  const auto want = reference::kTable2[0].params();
  CHECK(got.A == doctest::Approx(want.A).epsilon(0.01));
  CHECK(got.mu == doctest::Approx(want.mu).epsilon(0.01));
  CHECK(got.sigma == doctest::Approx(want.sigma).epsilon(0.01));
  CHECK(got.B == doctest::Approx(want.B).epsilon(0.01));
  CHECK(got.lambda == doctest::Approx(want.lambda).epsilon(0.01));
}

TEST_CASE("all-zero panel is a data error") {
  const auto path = scratch() / "flat_panel.csv";
  std::ofstream out(path);
  out << "discipline,dataset_year,age,n_eprints,total_citations\n";
  for (int a = 0; a <= 8; ++a) out << "hep,2019," << a << ",10,0\n";
  out.close();
  CHECK(run({"fit-history", "--input", path.string()}).code == kExitData);
}

TEST_CASE("volatility fit without an interior optimum exits with the convergence code") {
  const auto path = scratch() / "flat_m.csv";
  std::ofstream out(path);
  out << "t,m_hat\n";
  for (int t = 1; t <= 6; ++t) out << t << ",0.5\n";
  out.close();
  CHECK(run({"fit-dist", "--mseries", path.string()}).code == kExitConvergence);
}

TEST_CASE("reckoner reproduces the published astro-ph block") {
  const auto r = run({"reckoner", "--fit", astro_fit().string(), "--citations", "5,10,50,100",
                      "--ages", "2:10"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "discipline,c,T=2,T=3,T=4,T=5,T=6,T=7,T=8,T=9,T=10");
  for (int k = 0; k < 4; ++k) {
    REQUIRE(std::getline(in, line));
    std::stringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    CHECK(cell == "astro-ph");
    std::getline(cells, cell, ',');
    CHECK(std::stoi(cell) == reference::kTable3[k].c);
    for (double want : reference::kTable3[k].gamma) {
      std::getline(cells, cell, ',');
      CHECK(std::abs(std::stod(cell) - want) <= 0.01 + 1e-9);
    }
  }
}

TEST_CASE("simulate is byte-identical across runs") {
  const auto vol = scratch() / "vol.json";
  std::ofstream(vol) << R"({"s1": 0.0281, "s2": 0.200})";
  std::vector<std::string> outputs;
  for (int rep = 0; rep < 2; ++rep) {
    const auto csv = scratch() / "ens.csv";
    const auto r = run({"--timestamp", "2020-01-01T00:00:00Z", "simulate", "--fit",
                        astro_fit().string(), "--vol", vol.string(), "--paths", "100", "--seed",
                        "7", "--ensemble-csv", csv.string()});
    REQUIRE(r.code == 0);
    outputs.push_back(slurp(csv));
    outputs.push_back(r.out);
  }
  CHECK(outputs[0] == outputs[2]);
  CHECK(outputs[1] == outputs[3]);
  CHECK(!outputs[0].empty());
}

TEST_CASE("plot of a two-point line") {
  const auto data = scratch() / "two_points.csv";
  std::ofstream(data) << "x,y\n0,1\n1,2\n";
  const auto svg = scratch() / "two.svg";
  const auto r = run({"plot", "--csv", data.string(), "--x", "x", "--y", "y", "--out", svg.string()});
  REQUIRE(r.code == 0);
  const auto text = slurp(svg);
  std::size_t count = 0;
  for (auto pos = text.find("<polyline"); pos != std::string::npos; pos = text.find("<polyline", pos + 1)) {
    ++count;
  }
  CHECK(count == 1);
  CHECK(fs::exists(scratch() / "two.csv"));

  const auto one = scratch() / "one.csv";
  std::ofstream(one) << "x,y\n0,1\n";
  CHECK(run({"plot", "--csv", one.string(), "--x", "x", "--y", "y", "--out",
             (scratch() / "one.svg").string()}).code == kExitData);
}
