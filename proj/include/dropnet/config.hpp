#pragma once

// Scenario configuration: flat `Section.key = value` text with # comments.
// Unknown keys and out-of-range values are fatal with a line number, so a
// typo can never silently fall back to a default. The serialized canonical
// form feeds the config digest that report files carry for traceability.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dropnet {

enum class RoutingMode : uint8_t { Direct, Epidemic };

struct ScenarioConfig {
    // World
    double width = 1000.0;
    double height = 1000.0;
    double time_step = 0.1;
    double duration = 43200.0;
    uint64_t seed = 1;

    // Nodes
    uint32_t count = 41;
    double v_min = 0.2778;  // 1 km/h
    double v_max = 0.5556;  // 2 km/h
    double range = 25.0;
    double bitrate = 1e8;
    uint32_t mixers = 10;
    bool board_stationary = false;

    // Board
    uint32_t cells = 100;
    uint32_t credits = 100;

    // Mix
    uint32_t max_mixers = 3;
    uint32_t batch_threshold = 0;
    bool strict_replies = false;

    // Traffic
    uint32_t pairs = 4;
    uint32_t payload = 1024;
    double write_interval = 300.0;
    double read_lag = 60.0;
    double poll_interval = 120.0;
    double poll_timeout = 3600.0;  // re-poll if no response came back in time

    // Routing
    RoutingMode mode = RoutingMode::Direct;

    // Scenario
    std::string name = "custom";

    bool operator==(const ScenarioConfig&) const = default;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parse a config file; every failure names the file and line.
ScenarioConfig parse_config(const std::string& path);

/// Same grammar from an in-memory string; `origin` labels error messages.
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin);

/// Canonical text form: every key on its own line, stable ordering.
/// parse(serialize(c)) == c.
std::string serialize_config(const ScenarioConfig& cfg);

/// Hex digest of the canonical form, printed in reports.
std::string config_digest(const ScenarioConfig& cfg);

/// The two bundled scenarios. Identical apart from the park dimension and
/// walking speed; scenario files shipped in-repo parse to exactly these.
ScenarioConfig bundled_scenario1();
ScenarioConfig bundled_scenario2();

}  // namespace dropnet
