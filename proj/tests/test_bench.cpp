#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "pdhglp/bench.hpp"

using namespace pdhglp;

namespace {
const std::string kFixtures = PDHGLP_FIXTURE_DIR;
}

TEST_CASE("shifted geometric mean") {
  SECTION("constant times") {
    const std::vector<double> times(7, 42.0);
    REQUIRE(shifted_geometric_mean(times, 10.0) ==
            Catch::Approx(42.0).margin(1e-12));
  }
  SECTION("all zeros") {
    const std::vector<double> times = {0.0, 0.0};
    REQUIRE(shifted_geometric_mean(times, 10.0) ==
            Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("hand-evaluated pair") {
    const std::vector<double> times = {10.0, 90.0};
    // sqrt(20 * 100) - 10 = 34.72135955...
    REQUIRE(shifted_geometric_mean(times, 10.0) ==
            Catch::Approx(std::sqrt(2000.0) - 10.0).margin(1e-12));
  }
  SECTION("empty list throws") {
    REQUIRE_THROWS_AS(shifted_geometric_mean(std::vector<double>{}, 10.0),
                      std::invalid_argument);
  }
}

TEST_CASE("size classes use inclusive-lower thresholds") {
  REQUIRE(size_class_for(0) == SizeClass::kSmall);
  REQUIRE(size_class_for(999999) == SizeClass::kSmall);
  REQUIRE(size_class_for(1000000) == SizeClass::kMedium);  // boundary
  REQUIRE(size_class_for(9999999) == SizeClass::kMedium);
  REQUIRE(size_class_for(10000000) == SizeClass::kLarge);  // boundary
}

TEST_CASE("unsolved records contribute the time limit to SGM10") {
  BenchmarkRecord solved;
  solved.instance = "a";
  solved.status = SolveStatus::kOptimal;
  solved.solve_seconds = 10.0;
  BenchmarkRecord unsolved;
  unsolved.instance = "b";
  unsolved.status = SolveStatus::kTimeLimit;
  unsolved.solve_seconds = 90.0;  // ignored: unsolved counts the limit

  const double limit = 90.0;
  REQUIRE(aggregation_time(solved, limit) == 10.0);
  REQUIRE(aggregation_time(unsolved, limit) == 90.0);

  const std::vector<BenchmarkRecord> records = {solved, unsolved};
  const auto rows = aggregate_records(records, limit);
  // both are "small" (0 nonzeros); total row is last
  REQUIRE(rows.back().group == "total");
  REQUIRE(rows.back().instances == 2);
  REQUIRE(rows.back().solved == 1);
  REQUIRE(rows.back().sgm10 ==
          Catch::Approx(std::sqrt(20.0 * 100.0) - 10.0).margin(1e-12));
}

TEST_CASE("parse failures are excluded from aggregation with a row") {
  BenchmarkRecord bad;
  bad.instance = "broken";
  bad.parse_failed = true;
  BenchmarkRecord good;
  good.instance = "fine";
  good.status = SolveStatus::kOptimal;
  good.solve_seconds = 1.0;
  const std::vector<BenchmarkRecord> records = {bad, good};
  const auto rows = aggregate_records(records, 100.0);
  REQUIRE(rows.back().instances == 1);
  REQUIRE(rows.back().solved == 1);
}

TEST_CASE("re-aggregating a record set reproduces identical values") {
  std::vector<BenchmarkRecord> records;
  for (int i = 0; i < 9; ++i) {
    BenchmarkRecord r;
    r.instance = "i" + std::to_string(i);
    r.nonzeros = i * 700000;
    r.status = i % 3 == 0 ? SolveStatus::kTimeLimit : SolveStatus::kOptimal;
    r.solve_seconds = 0.5 * i;
    records.push_back(r);
  }
  const auto a = aggregate_records(records, 50.0);
  const auto b = aggregate_records(records, 50.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].group == b[i].group);
    REQUIRE(a[i].instances == b[i].instances);
    REQUIRE(a[i].solved == b[i].solved);
    REQUIRE(std::memcmp(&a[i].sgm10, &b[i].sgm10, sizeof(double)) == 0);
  }
}

TEST_CASE("config hash is stable and parameter-sensitive") {
  SolverParams p;
  const std::string h1 = config_hash(p, 100.0);
  const std::string h2 = config_hash(p, 100.0);
  REQUIRE(h1 == h2);
  p.eps_optimal = 1e-8;
  REQUIRE(config_hash(p, 100.0) != h1);
}

TEST_CASE("run_benchmark over a small directory") {
  // three solvable fixtures in a scratch directory
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "pdhglp_bench_test";
  fs::create_directories(dir);
  for (const std::string name : {"twovar.mps", "degen.mps", "knaprelax.mps"}) {
    fs::copy_file(fs::path(kFixtures) / "suite" / name, dir / name,
                  fs::copy_options::overwrite_existing);
  }
  std::ofstream(dir / "broken.mps") << "NAME NOPE\nGARBAGE\n";

  SolverParams params;
  params.eps_optimal = 1e-6;
  const BenchmarkReport report = run_benchmark(dir.string(), params, 30.0, 2);
  REQUIRE(report.records.size() == 4);
  // rows sorted by name regardless of completion order
  REQUIRE(report.records[0].instance == "broken.mps");
  REQUIRE(report.records[0].parse_failed);
  REQUIRE(report.records[1].instance == "degen.mps");
  int optimal = 0;
  for (const auto& r : report.records) {
    if (!r.parse_failed) {
      REQUIRE(r.status == SolveStatus::kOptimal);
      REQUIRE(r.solve_seconds <= 30.0);
      ++optimal;
    }
  }
  REQUIRE(optimal == 3);
  REQUIRE(report.aggregates.back().instances == 3);
  REQUIRE(report.aggregates.back().solved == 3);

  // SGM10 of the aggregate equals sgm() of the recorded times
  std::vector<double> times;
  for (const auto& r : report.records) {
    if (!r.parse_failed) times.push_back(r.solve_seconds);
  }
  REQUIRE(report.aggregates.back().sgm10 ==
          Catch::Approx(shifted_geometric_mean(times, 10.0)).margin(1e-12));

  // report writing round-trip sanity: header carries the config hash
  std::stringstream ss;
  write_report(report, ss);
  std::string header;
  std::getline(ss, header);
  REQUIRE_THAT(header, Catch::Matchers::ContainsSubstring(report.config_line));

  fs::remove_all(dir);
}

TEST_CASE("tight time limit yields a TimeLimit row counted at the limit") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "pdhglp_bench_limit";
  fs::create_directories(dir);
  fs::copy_file(fs::path(kFixtures) / "suite" / "rand09.mps", dir / "rand09.mps",
                fs::copy_options::overwrite_existing);
  SolverParams params;
  params.eps_optimal = 1e-12;  // unreachable fast: force the limit
  const BenchmarkReport report = run_benchmark(dir.string(), params, 0.0, 1);
  REQUIRE(report.records.size() == 1);
  REQUIRE(report.records[0].status == SolveStatus::kTimeLimit);
  REQUIRE(aggregation_time(report.records[0], 0.0) == 0.0);
  fs::remove_all(dir);
}
