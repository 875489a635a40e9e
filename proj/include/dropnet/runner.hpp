#pragma once

// Execution glue between the CLI and the library: run one (config, seed)
// world and write its reports, run a seed batch (independent worlds, safe to
// run concurrently), and compare the mean metrics of two report trees.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dropnet/config.hpp"
#include "dropnet/metrics.hpp"

namespace dropnet {

/// Runs the world to its configured duration and writes report.csv and
/// report.txt (plus trace.csv when asked) into out_dir.
Report run_single(const ScenarioConfig& cfg, uint64_t seed, const std::string& out_dir,
                  bool trace_events);

/// Runs seeds lo..hi inclusive into out_dir/seed_N/ and writes an aggregate
/// mean CSV to out_dir/aggregate.csv. Reports come back in seed order and do
/// not depend on whether seeds ran sequentially or in parallel.
std::vector<Report> run_batch(const ScenarioConfig& cfg, uint64_t seed_lo, uint64_t seed_hi,
                              const std::string& out_dir, bool trace_events);

/// One parsed report.csv data row.
struct CsvRow {
    std::string scenario;
    std::string seed;
    std::string kind;
    std::string stratum;
    double created = 0;
    double delivered = 0;
    std::optional<double> ratio;
    std::optional<double> latency_mean;
    std::optional<double> latency_median;
};

/// Parses report.csv bytes; throws std::runtime_error on a schema mismatch.
std::vector<CsvRow> parse_report_csv(const std::string& text);

/// Averages every report.csv found in dir (directly or one level down, as
/// the batch runner lays them out) and prints per-metric deltas and ratios
/// of b against a. Throws std::runtime_error on missing or mismatched data.
void compare_dirs(const std::string& dir_a, const std::string& dir_b, std::ostream& out);

}  // namespace dropnet
