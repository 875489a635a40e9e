#pragma once

// Message lifecycle accounting and the delivery/latency report. Every
// overlay message (WRITE, READ, RESPONSE) gets one append-only record;
// reports stratify by how many mixers the message's path used (0 to 3).
//
// Delivery endpoints: a WRITE is delivered when the board applies it, a
// READ when the request reaches the board (whether the cell was full or
// not). RESPONSE records and the reader-side end-to-end
// read latency are supplementary and appear only in report.txt; report.csv
// carries exactly the 2 kinds x (4 strata + total) = 10 rows.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dropnet {

enum class MsgKind : uint8_t { Write, Read, Response };

const char* kind_name(MsgKind kind);

class MetricsLog {
public:
    struct Record {
        uint64_t uid = 0;
        MsgKind kind = MsgKind::Write;
        uint32_t mixers = 0;
        double created_at = 0.0;
        std::optional<double> delivered_at;
        uint64_t parent = 0;         // RESPONSE: uid of the READ it answers
        bool carried_value = false;  // RESPONSE: Value rather than Null
    };

    void record_created(uint64_t uid, MsgKind kind, uint32_t mixers, double t,
                        uint64_t parent = 0, bool carried_value = false);

    /// Throws std::logic_error on an unknown uid or a second delivery: both
    /// indicate a conservation bug in the caller, never valid data.
    void record_delivered(uint64_t uid, double t);

    const std::vector<Record>& records() const { return records_; }
    const Record* find(uint64_t uid) const;

    uint64_t created_count(MsgKind kind) const;
    uint64_t delivered_count(MsgKind kind) const;

private:
    std::vector<Record> records_;
    std::unordered_map<uint64_t, size_t> index_;
};

struct StratumStats {
    uint64_t created = 0;
    uint64_t delivered = 0;
    std::optional<double> ratio;           // absent when nothing was created
    std::optional<double> latency_mean;    // absent when nothing was delivered
    std::optional<double> latency_median;
};

struct KindReport {
    std::array<StratumStats, 4> strata;
    // Total ratio is the arithmetic mean of the stratum ratios that exist;
    // total latencies pool every delivered record of the kind.
    StratumStats total;
};

struct SupplementStats {
    uint64_t count = 0;
    std::optional<double> mean;
    std::optional<double> median;
};

struct Report {
    std::string scenario;
    uint64_t seed = 0;
    std::string config_digest;
    KindReport write;
    KindReport read;
    // Supplementary (report.txt only).
    KindReport response;
    SupplementStats read_end_to_end;  // Value response receipt minus READ creation
};

Report compute_report(const MetricsLog& log, const std::string& scenario, uint64_t seed,
                      const std::string& digest);

/// Exact file bytes; deterministic for a deterministic log.
std::string report_csv(const Report& report);
std::string report_text(const Report& report);

/// Writes report.csv and report.txt into out_dir (created if missing).
/// Throws std::runtime_error if the directory or files cannot be written.
void write_report(const Report& report, const std::string& out_dir);

}  // namespace dropnet
