#include "dropnet/config.hpp"

#include <sodium.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dropnet {
namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

double want_double(const std::string& origin, int line, const std::string& key,
                   const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty() || !std::isfinite(d)) {
        fail(origin, line, "expected a number for " + key + ", got '" + v + "'");
    }
    return d;
}

double want_positive(const std::string& origin, int line, const std::string& key,
                     const std::string& v) {
    const double d = want_double(origin, line, key, v);
    if (d <= 0.0) fail(origin, line, key + " must be positive, got " + v);
    return d;
}

double want_nonneg(const std::string& origin, int line, const std::string& key,
                   const std::string& v) {
    const double d = want_double(origin, line, key, v);
    if (d < 0.0) fail(origin, line, key + " must not be negative, got " + v);
    return d;
}

uint64_t want_u64(const std::string& origin, int line, const std::string& key,
                  const std::string& v) {
    if (v.empty() || v[0] == '-') fail(origin, line, key + " must be a non-negative integer, got '" + v + "'");
    char* end = nullptr;
    const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) {
        fail(origin, line, "expected an integer for " + key + ", got '" + v + "'");
    }
    return u;
}

uint32_t want_u32(const std::string& origin, int line, const std::string& key,
                  const std::string& v) {
    const uint64_t u = want_u64(origin, line, key, v);
    if (u > UINT32_MAX) fail(origin, line, key + " out of range: " + v);
    return static_cast<uint32_t>(u);
}

bool want_bool(const std::string& origin, int line, const std::string& key,
               const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(origin, line, key + " must be true or false, got '" + v + "'");
}

// Shortest decimal form that parses back to exactly the same double.
std::string fmt_double(double d) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, d);
        if (std::strtod(buf, nullptr) == d) break;
    }
    return buf;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const size_t hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        const std::string stripped = trim(raw);
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos) fail(origin, line, "expected 'Section.key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string val = trim(stripped.substr(eq + 1));
        if (key.empty() || val.empty()) fail(origin, line, "expected 'Section.key = value'");

        if (key == "World.width") cfg.width = want_positive(origin, line, key, val);
        else if (key == "World.height") cfg.height = want_positive(origin, line, key, val);
        else if (key == "World.time_step") cfg.time_step = want_positive(origin, line, key, val);
        else if (key == "World.duration") cfg.duration = want_positive(origin, line, key, val);
        else if (key == "World.seed") cfg.seed = want_u64(origin, line, key, val);
        else if (key == "Nodes.count") cfg.count = want_u32(origin, line, key, val);
        else if (key == "Nodes.v_min") cfg.v_min = want_nonneg(origin, line, key, val);
        else if (key == "Nodes.v_max") cfg.v_max = want_positive(origin, line, key, val);
        else if (key == "Nodes.range") cfg.range = want_positive(origin, line, key, val);
        else if (key == "Nodes.bitrate") cfg.bitrate = want_positive(origin, line, key, val);
        else if (key == "Nodes.mixers") cfg.mixers = want_u32(origin, line, key, val);
        else if (key == "Nodes.board_stationary") cfg.board_stationary = want_bool(origin, line, key, val);
        else if (key == "Board.cells") cfg.cells = want_u32(origin, line, key, val);
        else if (key == "Board.credits") cfg.credits = want_u32(origin, line, key, val);
        else if (key == "Mix.max_mixers") cfg.max_mixers = want_u32(origin, line, key, val);
        else if (key == "Mix.batch_threshold") cfg.batch_threshold = want_u32(origin, line, key, val);
        else if (key == "Mix.strict_replies") cfg.strict_replies = want_bool(origin, line, key, val);
        else if (key == "Traffic.pairs") cfg.pairs = want_u32(origin, line, key, val);
        else if (key == "Traffic.payload") cfg.payload = want_u32(origin, line, key, val);
        else if (key == "Traffic.write_interval") cfg.write_interval = want_positive(origin, line, key, val);
        else if (key == "Traffic.read_lag") cfg.read_lag = want_nonneg(origin, line, key, val);
        else if (key == "Traffic.poll_interval") cfg.poll_interval = want_positive(origin, line, key, val);
        else if (key == "Traffic.poll_timeout") cfg.poll_timeout = want_positive(origin, line, key, val);
        else if (key == "Routing.mode") {
            if (val == "direct") cfg.mode = RoutingMode::Direct;
            else if (val == "epidemic") cfg.mode = RoutingMode::Epidemic;
            else fail(origin, line, "Routing.mode must be direct or epidemic, got '" + val + "'");
        } else if (key == "Scenario.name") {
            cfg.name = val;
        } else {
            fail(origin, line, "unknown key '" + key + "'");
        }
    }

    // Cross-field checks; no single line to blame, so report at file scope.
    auto whole = [&](const std::string& what) { throw ConfigError(origin + ": " + what); };
    if (cfg.v_min > cfg.v_max) whole("Nodes.v_min exceeds Nodes.v_max");
    if (cfg.cells < 1) whole("Board.cells must be at least 1");
    if (cfg.max_mixers > 3) whole("Mix.max_mixers must be at most 3");
    if (cfg.count < 1 + cfg.mixers) whole("Nodes.count must cover the board plus Nodes.mixers");
    if (cfg.count < 1 + cfg.mixers + 2 * cfg.pairs) {
        whole("not enough normal nodes for Traffic.pairs writer/reader pairs");
    }
    if (cfg.pairs > 0 && cfg.mixers < cfg.max_mixers) {
        whole("Nodes.mixers must be at least Mix.max_mixers when traffic is enabled");
    }
    return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string serialize_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "World.width = " << fmt_double(cfg.width) << "\n";
    out << "World.height = " << fmt_double(cfg.height) << "\n";
    out << "World.time_step = " << fmt_double(cfg.time_step) << "\n";
    out << "World.duration = " << fmt_double(cfg.duration) << "\n";
    out << "World.seed = " << cfg.seed << "\n";
    out << "Nodes.count = " << cfg.count << "\n";
    out << "Nodes.v_min = " << fmt_double(cfg.v_min) << "\n";
    out << "Nodes.v_max = " << fmt_double(cfg.v_max) << "\n";
    out << "Nodes.range = " << fmt_double(cfg.range) << "\n";
    out << "Nodes.bitrate = " << fmt_double(cfg.bitrate) << "\n";
    out << "Nodes.mixers = " << cfg.mixers << "\n";
    out << "Nodes.board_stationary = " << (cfg.board_stationary ? "true" : "false") << "\n";
    out << "Board.cells = " << cfg.cells << "\n";
    out << "Board.credits = " << cfg.credits << "\n";
    out << "Mix.max_mixers = " << cfg.max_mixers << "\n";
    out << "Mix.batch_threshold = " << cfg.batch_threshold << "\n";
    out << "Mix.strict_replies = " << (cfg.strict_replies ? "true" : "false") << "\n";
    out << "Traffic.pairs = " << cfg.pairs << "\n";
    out << "Traffic.payload = " << cfg.payload << "\n";
    out << "Traffic.write_interval = " << fmt_double(cfg.write_interval) << "\n";
    out << "Traffic.read_lag = " << fmt_double(cfg.read_lag) << "\n";
    out << "Traffic.poll_interval = " << fmt_double(cfg.poll_interval) << "\n";
    out << "Traffic.poll_timeout = " << fmt_double(cfg.poll_timeout) << "\n";
    out << "Routing.mode = " << (cfg.mode == RoutingMode::Direct ? "direct" : "epidemic") << "\n";
    out << "Scenario.name = " << cfg.name << "\n";
    return out.str();
}

std::string config_digest(const ScenarioConfig& cfg) {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialise");
    const std::string text = serialize_config(cfg);
    unsigned char digest[16];
    crypto_generichash(digest, sizeof digest, reinterpret_cast<const unsigned char*>(text.data()),
                       text.size(), nullptr, 0);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(32);
    for (unsigned char b : digest) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xf]);
    }
    return out;
}

ScenarioConfig bundled_scenario1() {
    ScenarioConfig cfg;
    cfg.name = "scenario1";
    cfg.mode = RoutingMode::Epidemic;
    cfg.pairs = 4;
    cfg.write_interval = 2700.0;
    cfg.read_lag = 60.0;
    cfg.poll_interval = 120.0;
    cfg.poll_timeout = 7200.0;
    return cfg;
}

ScenarioConfig bundled_scenario2() {
    ScenarioConfig cfg = bundled_scenario1();
    cfg.name = "scenario2";
    cfg.width = 500.0;
    cfg.height = 500.0;
    cfg.v_min = 0.5556;  // 2 km/h
    cfg.v_max = 0.8333;  // 3 km/h
    return cfg;
}

}  // namespace dropnet
