#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dropnet/runner.hpp"

using namespace dropnet;
namespace fs = std::filesystem;

namespace {

ScenarioConfig quick_config() {
    ScenarioConfig cfg = bundled_scenario1();
    cfg.duration = 4000.0;
    cfg.name = "quick";
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
    fs::path operator/(const std::string& child) const { return path / child; }
};

}  // namespace

TEST_CASE("run_single writes both report files and returns the same numbers") {
    TempDir dir("dropnet_runner_single");
    Report rep = run_single(quick_config(), 3, dir.str(), false);

    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "report.txt"));
    CHECK_FALSE(fs::exists(dir / "trace.csv"));
    CHECK(slurp(dir / "report.csv") == report_csv(rep));
    CHECK(slurp(dir / "report.txt") == report_text(rep));
    CHECK(rep.scenario == "quick");
    CHECK(rep.seed == 3);
    CHECK(rep.write.total.created > 0);
}

TEST_CASE("rerunning a seed reproduces report.csv byte for byte") {
    TempDir a("dropnet_runner_rerun_a");
    TempDir b("dropnet_runner_rerun_b");
    run_single(quick_config(), 5, a.str(), false);
    run_single(quick_config(), 5, b.str(), false);
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
    CHECK(slurp(a / "report.txt") == slurp(b / "report.txt"));
}

TEST_CASE("tracing adds a headed trace.csv") {
    TempDir dir("dropnet_runner_trace");
    run_single(quick_config(), 3, dir.str(), true);
    REQUIRE(fs::exists(dir / "trace.csv"));
    std::string trace = slurp(dir / "trace.csv");
    CHECK(trace.rfind("time,event,node,msg_uid,detail\n", 0) == 0);
    CHECK(trace.find("create") != std::string::npos);
    CHECK(trace.find("WRITE") != std::string::npos);
}

TEST_CASE("parse_report_csv reads its own output and rejects foreign schemas") {
    TempDir dir("dropnet_runner_parse");
    Report rep = run_single(quick_config(), 3, dir.str(), false);
    auto rows = parse_report_csv(slurp(dir / "report.csv"));
    REQUIRE(rows.size() == 10);
    CHECK(rows[0].kind == "WRITE");
    CHECK(rows[0].stratum == "0");
    CHECK(rows[4].stratum == "total");
    CHECK(rows[5].kind == "READ");
    CHECK(rows[4].created == static_cast<double>(rep.write.total.created));
    if (rep.write.total.ratio) {
        REQUIRE(rows[4].ratio.has_value());
        CHECK(std::abs(*rows[4].ratio - *rep.write.total.ratio) < 1e-6);
    }

    CHECK_THROWS_AS(parse_report_csv("who,what\n1,2\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_report_csv(""), std::runtime_error);
    std::string truncated_row =
        "scenario,seed,kind,stratum,created,delivered,ratio,latency_mean,latency_median\n"
        "x,1,WRITE,0,1\n";
    CHECK_THROWS_AS(parse_report_csv(truncated_row), std::runtime_error);
}

TEST_CASE("run_batch lays out per-seed trees plus an aggregate of means") {
    TempDir dir("dropnet_runner_batch");
    ScenarioConfig cfg = quick_config();
    auto reports = run_batch(cfg, 1, 3, dir.str(), false);
    REQUIRE(reports.size() == 3);

    for (uint64_t seed = 1; seed <= 3; ++seed) {
        CHECK(fs::exists(dir / ("seed_" + std::to_string(seed)) / "report.csv"));
        CHECK(reports[seed - 1].seed == seed);
    }

    // Batch results equal independent single runs of the same seeds.
    TempDir single("dropnet_runner_batch_single");
    Report alone = run_single(cfg, 2, single.str(), false);
    CHECK(report_csv(alone) == report_csv(reports[1]));
    CHECK(slurp(single / "report.csv") == slurp(dir / "seed_2" / "report.csv"));

    // The aggregate holds the arithmetic means of the per-seed rows.
    auto agg = parse_report_csv(slurp(dir / "aggregate.csv"));
    REQUIRE(agg.size() == 10);
    CHECK(agg[0].seed == "1..3");
    double created_mean = 0.0;
    for (const auto& rep : reports) created_mean += rep.write.total.created;
    created_mean /= 3.0;
    CHECK(std::abs(agg[4].created - created_mean) < 1e-3);

    double ratio_mean = 0.0;
    int present = 0;
    for (const auto& rep : reports) {
        if (rep.write.total.ratio) {
            ratio_mean += *rep.write.total.ratio;
            present += 1;
        }
    }
    if (present == 3) {
        REQUIRE(agg[4].ratio.has_value());
        CHECK(std::abs(*agg[4].ratio - ratio_mean / 3.0) < 1e-5);
    }

    double lat_mean = 0.0;
    present = 0;
    for (const auto& rep : reports) {
        if (rep.read.total.latency_mean) {
            lat_mean += *rep.read.total.latency_mean;
            present += 1;
        }
    }
    if (present == 3) {
        REQUIRE(agg[9].latency_mean.has_value());
        CHECK(std::abs(*agg[9].latency_mean - lat_mean / 3.0) < 1e-2);
    }
}

TEST_CASE("comparing a run against itself shows zero deltas") {
    TempDir dir("dropnet_runner_cmp");
    run_single(quick_config(), 4, dir.str(), false);

    std::ostringstream out;
    compare_dirs(dir.str(), dir.str(), out);
    const std::string text = out.str();
    CHECK(text.find("WRITE") != std::string::npos);
    CHECK(text.find("READ") != std::string::npos);
    CHECK(text.find("latency_mean") != std::string::npos);
    CHECK(text.find("-0.") == std::string::npos);  // no negative deltas

    // Every delta column is exactly zero or absent.
    std::istringstream lines(text);
    std::string line;
    size_t zero_deltas = 0;
    while (std::getline(lines, line)) {
        if (line.find("0.000000") != std::string::npos) zero_deltas += 1;
    }
    CHECK(zero_deltas >= 10);
}

TEST_CASE("comparing against an empty directory fails loudly") {
    TempDir dir("dropnet_runner_cmp_missing");
    TempDir empty("dropnet_runner_cmp_empty");
    fs::create_directories(empty.path);
    run_single(quick_config(), 4, dir.str(), false);
    std::ostringstream out;
    CHECK_THROWS_AS(compare_dirs(dir.str(), empty.str(), out), std::runtime_error);
}

TEST_CASE("a batch over one seed matches its single run") {
    TempDir batch("dropnet_runner_one");
    auto reports = run_batch(quick_config(), 9, 9, batch.str(), false);
    REQUIRE(reports.size() == 1);
    TempDir single("dropnet_runner_one_single");
    Report alone = run_single(quick_config(), 9, single.str(), false);
    CHECK(report_csv(reports[0]) == report_csv(alone));
    CHECK(fs::exists(batch / "aggregate.csv"));
}
