#include "dropnet/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dropnet/world.hpp"

namespace dropnet {
namespace {

namespace fs = std::filesystem;

constexpr const char* kCsvHeader =
    "scenario,seed,kind,stratum,created,delivered,ratio,latency_mean,latency_median";

std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, const char* spec) {
    return v ? fmt(*v, spec) : std::string{};
}

struct MeanAcc {
    double sum = 0;
    size_t n = 0;
    void add(double v) {
        sum += v;
        ++n;
    }
    std::optional<double> mean() const {
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    }
};

struct RowAcc {
    MeanAcc created, delivered, ratio, latency_mean, latency_median;
};

/// Mean of each column over many report files, keyed by (kind, stratum) in
/// first-seen order. Optional columns average only the rows where they are
/// present, matching how the per-run total excludes empty strata.
class Aggregate {
public:
    void add(const std::vector<CsvRow>& rows) {
        for (const auto& r : rows) {
            auto key = std::make_pair(r.kind, r.stratum);
            auto it = index_.find(key);
            if (it == index_.end()) {
                it = index_.emplace(key, order_.size()).first;
                order_.push_back(key);
                accs_.emplace_back();
            }
            RowAcc& acc = accs_[it->second];
            acc.created.add(r.created);
            acc.delivered.add(r.delivered);
            if (r.ratio) acc.ratio.add(*r.ratio);
            if (r.latency_mean) acc.latency_mean.add(*r.latency_mean);
            if (r.latency_median) acc.latency_median.add(*r.latency_median);
        }
    }

    const std::vector<std::pair<std::string, std::string>>& keys() const { return order_; }
    const RowAcc& row(size_t i) const { return accs_[i]; }

private:
    std::map<std::pair<std::string, std::string>, size_t> index_;
    std::vector<std::pair<std::string, std::string>> order_;
    std::vector<RowAcc> accs_;
};

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// report.csv files under dir: either dir/report.csv or one per child
/// directory, the layout run_batch produces. Sorted for stable output.
std::vector<fs::path> find_reports(const std::string& dir) {
    std::vector<fs::path> out;
    fs::path root(dir);
    if (!fs::is_directory(root)) throw std::runtime_error(dir + " is not a directory");
    if (fs::exists(root / "report.csv")) out.push_back(root / "report.csv");
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "report.csv"))
            out.push_back(entry.path() / "report.csv");
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw std::runtime_error("no report.csv under " + dir);
    return out;
}

Aggregate load_dir(const std::string& dir) {
    Aggregate agg;
    for (const auto& path : find_reports(dir)) agg.add(parse_report_csv(read_file(path)));
    return agg;
}

void write_aggregate_csv(const fs::path& path, const ScenarioConfig& cfg, uint64_t lo, uint64_t hi,
                         const Aggregate& agg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kCsvHeader << '\n';
    std::string seeds = std::to_string(lo) + ".." + std::to_string(hi);
    for (size_t i = 0; i < agg.keys().size(); ++i) {
        const auto& [kind, stratum] = agg.keys()[i];
        const RowAcc& acc = agg.row(i);
        out << cfg.name << ',' << seeds << ',' << kind << ',' << stratum << ','
            << fmt_opt(acc.created.mean(), "%.4f") << ',' << fmt_opt(acc.delivered.mean(), "%.4f")
            << ',' << fmt_opt(acc.ratio.mean(), "%.6f") << ','
            << fmt_opt(acc.latency_mean.mean(), "%.3f") << ','
            << fmt_opt(acc.latency_median.mean(), "%.3f") << '\n';
    }
    if (!out.flush()) throw std::runtime_error("cannot write " + path.string());
}

std::optional<double> parse_opt(const std::string& field) {
    if (field.empty()) return std::nullopt;
    size_t used = 0;
    double v = std::stod(field, &used);
    if (used != field.size()) throw std::runtime_error("bad numeric field: " + field);
    return v;
}

}  // namespace

Report run_single(const ScenarioConfig& cfg, uint64_t seed, const std::string& out_dir,
                  bool trace_events) {
    World world(cfg, seed);
    std::ofstream trace;
    if (trace_events) {
        fs::create_directories(out_dir);
        trace.open(fs::path(out_dir) / "trace.csv", std::ios::binary);
        if (!trace) throw std::runtime_error("cannot write trace.csv under " + out_dir);
        trace << "time,event,node,msg_uid,detail\n";
        world.set_trace(&trace);
    }
    world.run();
    Report report = compute_report(world.metrics(), cfg.name, seed, config_digest(cfg));
    write_report(report, out_dir);
    return report;
}

std::vector<Report> run_batch(const ScenarioConfig& cfg, uint64_t seed_lo, uint64_t seed_hi,
                              const std::string& out_dir, bool trace_events) {
    if (seed_hi < seed_lo) throw std::runtime_error("seed range is empty");
    size_t count = static_cast<size_t>(seed_hi - seed_lo) + 1;
    std::vector<Report> reports(count);
    std::vector<std::string> errors(count);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
        uint64_t seed = seed_lo + static_cast<uint64_t>(i);
        std::string dir = out_dir + "/seed_" + std::to_string(seed);
        try {
            reports[static_cast<size_t>(i)] = run_single(cfg, seed, dir, trace_events);
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(i)] = e.what();
        }
    }
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error(err);

    Aggregate agg;
    for (const auto& report : reports) agg.add(parse_report_csv(report_csv(report)));
    write_aggregate_csv(fs::path(out_dir) / "aggregate.csv", cfg, seed_lo, seed_hi, agg);
    return reports;
}

std::vector<CsvRow> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("report.csv header mismatch");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != 9) throw std::runtime_error("report.csv row has wrong arity");
        CsvRow row;
        row.scenario = fields[0];
        row.seed = fields[1];
        row.kind = fields[2];
        row.stratum = fields[3];
        row.created = *parse_opt(fields[4]);
        row.delivered = *parse_opt(fields[5]);
        row.ratio = parse_opt(fields[6]);
        row.latency_mean = parse_opt(fields[7]);
        row.latency_median = parse_opt(fields[8]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("report.csv carries no rows");
    return rows;
}

void compare_dirs(const std::string& dir_a, const std::string& dir_b, std::ostream& out) {
    Aggregate a = load_dir(dir_a);
    Aggregate b = load_dir(dir_b);
    if (a.keys() != b.keys()) throw std::runtime_error("directories report different row sets");

    char buf[200];
    std::snprintf(buf, sizeof buf, "%-6s %-8s %-15s %14s %14s %14s %10s\n", "kind", "stratum",
                  "metric", "a", "b", "delta", "b/a");
    out << buf;
    auto line = [&](const std::string& kind, const std::string& stratum, const char* metric,
                    std::optional<double> va, std::optional<double> vb) {
        std::string sa = va ? fmt(*va, "%.6f") : "-";
        std::string sb = vb ? fmt(*vb, "%.6f") : "-";
        std::string sd = (va && vb) ? fmt(*vb - *va, "%.6f") : "-";
        std::string sr = (va && vb && *va != 0.0) ? fmt(*vb / *va, "%.4f") : "-";
        std::snprintf(buf, sizeof buf, "%-6s %-8s %-15s %14s %14s %14s %10s\n", kind.c_str(),
                      stratum.c_str(), metric, sa.c_str(), sb.c_str(), sd.c_str(), sr.c_str());
        out << buf;
    };
    for (size_t i = 0; i < a.keys().size(); ++i) {
        const auto& [kind, stratum] = a.keys()[i];
        const RowAcc& ra = a.row(i);
        const RowAcc& rb = b.row(i);
        line(kind, stratum, "created", ra.created.mean(), rb.created.mean());
        line(kind, stratum, "delivered", ra.delivered.mean(), rb.delivered.mean());
        line(kind, stratum, "ratio", ra.ratio.mean(), rb.ratio.mean());
        line(kind, stratum, "latency_mean", ra.latency_mean.mean(), rb.latency_mean.mean());
        line(kind, stratum, "latency_median", ra.latency_median.mean(), rb.latency_median.mean());
    }
}

}  // namespace dropnet
