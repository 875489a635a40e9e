#include "dropnet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dropnet {

const char* kind_name(MsgKind kind) {
    switch (kind) {
        case MsgKind::Write: return "WRITE";
        case MsgKind::Read: return "READ";
        case MsgKind::Response: return "RESPONSE";
    }
    return "?";
}

void MetricsLog::record_created(uint64_t uid, MsgKind kind, uint32_t mixers, double t,
                                uint64_t parent, bool carried_value) {
    if (index_.count(uid)) throw std::logic_error("metrics: uid created twice");
    if (mixers > 3) throw std::logic_error("metrics: mixer stratum out of range");
    index_.emplace(uid, records_.size());
    records_.push_back({uid, kind, mixers, t, std::nullopt, parent, carried_value});
}

void MetricsLog::record_delivered(uint64_t uid, double t) {
    auto it = index_.find(uid);
    if (it == index_.end()) throw std::logic_error("metrics: delivery for unknown uid");
    Record& rec = records_[it->second];
    if (rec.delivered_at) throw std::logic_error("metrics: uid delivered twice");
    if (t < rec.created_at) throw std::logic_error("metrics: delivery precedes creation");
    rec.delivered_at = t;
}

const MetricsLog::Record* MetricsLog::find(uint64_t uid) const {
    auto it = index_.find(uid);
    return it == index_.end() ? nullptr : &records_[it->second];
}

uint64_t MetricsLog::created_count(MsgKind kind) const {
    uint64_t n = 0;
    for (const Record& r : records_) n += r.kind == kind;
    return n;
}

uint64_t MetricsLog::delivered_count(MsgKind kind) const {
    uint64_t n = 0;
    for (const Record& r : records_) n += r.kind == kind && r.delivered_at.has_value();
    return n;
}

namespace {

std::optional<double> median_of(std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return (v[mid - 1] + upper) / 2.0;
}

void finish_stats(StratumStats& s, std::vector<double>& latencies) {
    if (s.created > 0) s.ratio = static_cast<double>(s.delivered) / static_cast<double>(s.created);
    if (!latencies.empty()) {
        double sum = 0.0;
        for (double l : latencies) sum += l;
        s.latency_mean = sum / static_cast<double>(latencies.size());
        s.latency_median = median_of(latencies);
    }
}

KindReport compute_kind(const MetricsLog& log, MsgKind kind) {
    KindReport rep;
    std::array<std::vector<double>, 4> lat;
    std::vector<double> lat_all;
    for (const auto& r : log.records()) {
        if (r.kind != kind) continue;
        StratumStats& s = rep.strata[r.mixers];
        s.created += 1;
        rep.total.created += 1;
        if (r.delivered_at) {
            s.delivered += 1;
            rep.total.delivered += 1;
            const double l = *r.delivered_at - r.created_at;
            lat[r.mixers].push_back(l);
            lat_all.push_back(l);
        }
    }
    for (int k = 0; k < 4; ++k) finish_stats(rep.strata[k], lat[k]);
    if (!lat_all.empty()) {
        double sum = 0.0;
        for (double l : lat_all) sum += l;
        rep.total.latency_mean = sum / static_cast<double>(lat_all.size());
        rep.total.latency_median = median_of(lat_all);
    }
    // Four-way mean over the strata that saw traffic; all-empty stays absent.
    double ratio_sum = 0.0;
    int present = 0;
    for (const auto& s : rep.strata) {
        if (s.ratio) {
            ratio_sum += *s.ratio;
            ++present;
        }
    }
    if (present > 0) rep.total.ratio = ratio_sum / present;
    return rep;
}

std::string fmt_opt(const std::optional<double>& v, const char* spec) {
    if (!v) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, *v);
    return buf;
}

std::string fmt_ratio(const std::optional<double>& v) { return fmt_opt(v, "%.6f"); }
std::string fmt_latency(const std::optional<double>& v) { return fmt_opt(v, "%.3f"); }

void csv_rows(std::ostringstream& out, const Report& report, const char* kind,
              const KindReport& rep) {
    auto row = [&](const std::string& stratum, const StratumStats& s) {
        out << report.scenario << ',' << report.seed << ',' << kind << ',' << stratum << ','
            << s.created << ',' << s.delivered << ',' << fmt_ratio(s.ratio) << ','
            << fmt_latency(s.latency_mean) << ',' << fmt_latency(s.latency_median) << '\n';
    };
    for (int k = 0; k < 4; ++k) row(std::to_string(k), rep.strata[k]);
    row("total", rep.total);
}

void text_rows(std::ostringstream& out, const char* kind, const KindReport& rep) {
    auto row = [&](const std::string& stratum, const StratumStats& s) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-8s %-6s %8llu %9llu %10s %14s %16s\n", kind,
                      stratum.c_str(), static_cast<unsigned long long>(s.created),
                      static_cast<unsigned long long>(s.delivered),
                      s.ratio ? fmt_ratio(s.ratio).c_str() : "-",
                      s.latency_mean ? fmt_latency(s.latency_mean).c_str() : "-",
                      s.latency_median ? fmt_latency(s.latency_median).c_str() : "-");
        out << buf;
    };
    for (int k = 0; k < 4; ++k) row(std::to_string(k), rep.strata[k]);
    row("total", rep.total);
}

}  // namespace

Report compute_report(const MetricsLog& log, const std::string& scenario, uint64_t seed,
                      const std::string& digest) {
    Report report;
    report.scenario = scenario;
    report.seed = seed;
    report.config_digest = digest;
    report.write = compute_kind(log, MsgKind::Write);
    report.read = compute_kind(log, MsgKind::Read);
    report.response = compute_kind(log, MsgKind::Response);

    std::vector<double> e2e;
    for (const auto& r : log.records()) {
        if (r.kind != MsgKind::Response || !r.carried_value || !r.delivered_at) continue;
        const auto* read = log.find(r.parent);
        if (!read) throw std::logic_error("metrics: response without its read");
        e2e.push_back(*r.delivered_at - read->created_at);
    }
    report.read_end_to_end.count = e2e.size();
    if (!e2e.empty()) {
        double sum = 0.0;
        for (double l : e2e) sum += l;
        report.read_end_to_end.mean = sum / static_cast<double>(e2e.size());
        report.read_end_to_end.median = median_of(e2e);
    }
    return report;
}

std::string report_csv(const Report& report) {
    std::ostringstream out;
    out << "scenario,seed,kind,stratum,created,delivered,ratio,latency_mean,latency_median\n";
    csv_rows(out, report, "WRITE", report.write);
    csv_rows(out, report, "READ", report.read);
    return out.str();
}

std::string report_text(const Report& report) {
    std::ostringstream out;
    out << "simulation report\n";
    out << "scenario: " << report.scenario << "\n";
    out << "seed: " << report.seed << "\n";
    out << "config digest: " << report.config_digest << "\n\n";
    out << "delivery and latency by mixer stratum (latency in seconds):\n";
    out << "  kind     strat   created delivered      ratio   latency_mean   latency_median\n";
    text_rows(out, "WRITE", report.write);
    text_rows(out, "READ", report.read);
    out << "\n";
    out << "WRITE delivery is measured at the board applying the request; READ delivery\n";
    out << "at the request reaching the board. A total ratio is the mean of its stratum\n";
    out << "ratios; strata with no created messages are excluded from that mean.\n\n";
    out << "supplementary (not part of report.csv):\n";
    text_rows(out, "RESPONSE", report.response);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "  read end-to-end (reader receipt of a value): count %llu mean %s median %s\n",
                  static_cast<unsigned long long>(report.read_end_to_end.count),
                  report.read_end_to_end.mean ? fmt_latency(report.read_end_to_end.mean).c_str()
                                              : "-",
                  report.read_end_to_end.median
                      ? fmt_latency(report.read_end_to_end.median).c_str()
                      : "-");
    out << buf;
    return out.str();
}

void write_report(const Report& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir);
    auto dump = [&](const char* name, const std::string& content) {
        const fs::path p = fs::path(out_dir) / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << content;
        if (!f) throw std::runtime_error("write failed for " + p.string());
    };
    dump("report.csv", report_csv(report));
    dump("report.txt", report_text(report));
}

}  // namespace dropnet
