#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmrt/errors.hpp"
#include "lmrt/rng.hpp"
#include "lmrt/sweep.hpp"

using namespace lmrt;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lmrt_sweep_" + name)).string();
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  return Json::parse(in);
}

Json base_config() {
  return Json::parse(R"({
    "schedule": {"type": "mesoscopic", "beta": 0.5},
    "n": [200, 2000],
    "replications": 6,
    "master_seed": 17,
    "statistics": {"height": true, "degree_hist": true, "spine": true,
                   "fringe": {"size_cap": 3}, "branchpoints": {"k": 2}, "chain": true},
    "comparisons": [{"name": "h", "metric": "height_scaled", "reference": 4.0,
                     "threshold": 10.0}]
  })");
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const auto c = SweepConfig::from_json(base_config());
  CHECK(c.n == std::vector<Label>{200, 2000});
  CHECK(c.statistics.fringe_cap == 3);
  CHECK(c.statistics.branchpoints_k == 2);
  CHECK(c.digest().size() == 16);

  auto bad = base_config();
  bad["replications"] = 0;
  CHECK_THROWS_AS(SweepConfig::from_json(bad), InvalidArgument);
  bad = base_config();
  bad["n"] = Json::array();
  CHECK_THROWS_AS(SweepConfig::from_json(bad), InvalidArgument);
  bad = base_config();
  bad["n"] = Json::array({0});
  CHECK_THROWS_AS(SweepConfig::from_json(bad), InvalidArgument);
  bad = base_config();
  bad["statistics"] = Json::object();
  CHECK_THROWS_AS(SweepConfig::from_json(bad), InvalidArgument);
  bad = base_config();
  bad["schedule"]["beta"] = 1.2;
  CHECK_THROWS_AS(SweepConfig::from_json(bad), InvalidArgument);
  bad = base_config();
  bad["schedule"] = {{"type", "nope"}};
  CHECK_THROWS_AS(SweepConfig::from_json(bad), InvalidArgument);
  bad = base_config();
  bad["comparisons"][0]["n"] = 7;
  CHECK_THROWS_AS(SweepConfig::from_json(bad), InvalidArgument);

  // threads and output paths do not change the digest
  auto other = base_config();
  other["threads"] = 3;
  other["output"] = {{"json", "x.json"}};
  CHECK(SweepConfig::from_json(other).digest() == c.digest());
  other["master_seed"] = 18;
  CHECK(SweepConfig::from_json(other).digest() != c.digest());
}

TEST_CASE("single cell at n = 1") {
  SweepConfig c;
  c.schedule_spec = {{"type", "mesoscopic"}, {"beta", 0.5}};
  c.n = {1};
  c.replications = 1;
  c.statistics.height = true;
  const auto r = run_sweep(c);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].metrics.at("height") == 0.0);
  CHECK(r.cells[0].seed == derive_seed(0, 0));
  CHECK(r.complete);
}

TEST_CASE("records, seeds and determinism") {
  auto j = base_config();
  j["threads"] = 1;
  const auto c1 = SweepConfig::from_json(j);
  j["threads"] = 4;
  const auto c4 = SweepConfig::from_json(j);
  const auto a = run_sweep(c1);
  const auto b = run_sweep(c4);
  const auto again = run_sweep(c1);
  CHECK(a.cells.size() == 12);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.to_json().dump() == again.to_json().dump());
  for (std::size_t i = 0; i < a.cells.size(); ++i)
    CHECK(a.cells[i].seed == derive_seed(17, i));
  CHECK(a.generator == kGeneratorName);
  REQUIRE(a.comparisons.size() == 1);
  CHECK(a.comparisons[0].n == 2000);
  CHECK(a.comparisons[0].pass);
  CHECK(a.all_pass());
}

TEST_CASE("aggregates are recomputable from the records") {
  const auto r = run_sweep(SweepConfig::from_json(base_config()));
  const auto recomputed = aggregate_cells(r.cells);
  CHECK(Json(r.to_json()["aggregates"]) == ReplicationReport{r.config, "", "", r.cells, recomputed, {}, true, 0}.to_json()["aggregates"]);
  // and through a JSON round trip, bit for bit
  const auto back = ReplicationReport::from_json(Json::parse(r.to_json().dump()));
  const auto again = aggregate_cells(back.cells);
  for (const auto& [n, metrics] : r.aggregates)
    for (const auto& [name, s] : metrics) {
      CHECK(again.at(n).at(name).mean == s.mean);
      CHECK(again.at(n).at(name).variance == s.variance);
      CHECK(again.at(n).at(name).q95 == s.q95);
      CHECK(back.aggregates.at(n).at(name).mean == s.mean);
    }
  // record order does not matter
  auto shuffled = r.cells;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto agg2 = aggregate_cells(shuffled);
  for (const auto& [n, metrics] : r.aggregates)
    for (const auto& [name, s] : metrics) CHECK(agg2.at(n).at(name).mean == s.mean);
}

TEST_CASE("artifacts and failing comparisons") {
  auto j = base_config();
  const auto json_path = temp_path("report.json"), csv_path = temp_path("report.csv");
  j["output"] = {{"json", json_path}, {"csv", csv_path}};
  j["comparisons"].push_back({{"name", "tight"}, {"metric", "height_scaled"},
                              {"reference", 100.0}, {"threshold", 0.1}});
  j["comparisons"].push_back({{"name", "unknown"}, {"metric", "nope"},
                              {"reference", 1.0}, {"threshold", 0.1}});
  const auto r = run_sweep(SweepConfig::from_json(j));
  CHECK_FALSE(r.all_pass());
  CHECK_FALSE(r.comparisons[1].pass);
  CHECK_FALSE(r.comparisons[2].pass);
  const auto file = read_json(json_path);
  CHECK(file == Json::parse(r.to_json().dump()));
  CHECK(file["complete"] == true);
  CHECK(file["config_digest"] == r.config_digest);
  std::ifstream csv(csv_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header.rfind("n,rep,seed,", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 12);
  std::filesystem::remove(json_path);
  std::filesystem::remove(csv_path);
}

TEST_CASE("partial results and resumption") {
  const auto path = temp_path("partial.json");
  // j(m) table covers m <= 30 only, so n = 100 cells fail.
  Json j = {{"schedule", {{"type", "custom_j"}, {"j", Json::array()}}},
            {"n", {20, 100}},
            {"replications", 3},
            {"master_seed", 5},
            {"statistics", {{"height", true}}},
            {"output", {{"json", path}}},
            {"threads", 1}};
  for (Label m = 1; m <= 30; ++m) j["schedule"]["j"].push_back(std::max<Label>(1, m / 2));
  CHECK_THROWS_AS(run_sweep(SweepConfig::from_json(j)), InvalidArgument);
  const auto partial = read_json(path);
  CHECK(partial["complete"] == false);
  CHECK(partial["resume_from"] == 3);
  CHECK(partial["cells"].size() == 3);

  // A complete run, then a resumed run from a truncated copy of it.
  const auto full_path = temp_path("full.json");
  auto good = base_config();
  good["output"] = {{"json", full_path}};
  const auto full = run_sweep(SweepConfig::from_json(good));
  auto cut = full.to_json();
  cut["cells"].erase(cut["cells"].begin() + 5, cut["cells"].end());
  cut["complete"] = false;
  cut["resume_from"] = 5;
  {
    std::ofstream out(path);
    out << cut.dump();
  }
  good["resume"] = path;
  good.erase("output");
  const auto resumed = run_sweep(SweepConfig::from_json(good));
  CHECK(resumed.to_json().dump() == full.to_json().dump());

  // mismatched digest
  auto other = good;
  other["master_seed"] = 99;
  CHECK_THROWS_AS(run_sweep(SweepConfig::from_json(other)), InvalidArgument);
  std::filesystem::remove(path);
  std::filesystem::remove(full_path);
}

TEST_CASE("unwritable output") {
  auto j = base_config();
  j["output"] = {{"json", "/nonexistent-dir/x/report.json"}};
  CHECK_THROWS_AS(run_sweep(SweepConfig::from_json(j)), IoError);
}

TEST_CASE("mesoscopic height sweep") {
  const auto c = SweepConfig::from_json(Json::parse(R"({
    "schedule": {"type": "mesoscopic", "beta": 0.5},
    "n": [100000, 400000, 1600000],
    "replications": 20,
    "master_seed": 4,
    "statistics": ["height"]
  })"));
  const auto r = run_sweep(c);
  double prev_gap = 1e9;
  for (Label n : c.n) {
    const double mean = r.aggregates.at(n).at("height_scaled").mean;
    CHECK(std::abs(mean - 4.0) <= 0.4);
    const double gap = std::abs(mean - 4.0);
    CHECK(gap <= prev_gap);
    prev_gap = gap;
  }
}
