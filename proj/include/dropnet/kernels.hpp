#pragma once

// Data-parallel inner loops of the simulation: random-waypoint integration
// and pairwise contact detection. Both exist twice, a serial reference and
// an OpenMP version, and the two must agree bitwise: per-node RNG streams
// and disjoint writes make the parallel schedule irrelevant to the result.
// The world calls the dispatching wrappers; tests pin serial == parallel;
// kernel_bench times one against the other.

#include <cstdint>
#include <vector>

#include "dropnet/rng.hpp"

namespace dropnet {

/// Structure-of-arrays motion state. One RNG stream per node, so waypoint
/// redraws consume randomness identically no matter which thread runs them.
struct MobilityField {
    double width = 0.0;
    double height = 0.0;
    double v_min = 0.0;
    double v_max = 0.0;

    std::vector<double> x, y;    // position, meters
    std::vector<double> wx, wy;  // current waypoint
    std::vector<double> speed;   // current leg, m/s
    std::vector<uint8_t> frozen; // stationary nodes skip integration
    std::vector<Rng> rng;

    size_t size() const { return x.size(); }

    /// Appends a node at (px, py) with its own RNG stream and draws its
    /// first waypoint and speed (draw order: wx, wy, speed).
    void add_node(double px, double py, bool stationary, Rng stream);
};

/// One time step of random-waypoint motion. A node sitting on its waypoint
/// redraws waypoint and speed and does not move this step; otherwise it
/// advances speed*dt toward the waypoint, stopping exactly on it.
void advance_positions_serial(MobilityField& f, double dt);
void advance_positions_parallel(MobilityField& f, double dt);
void advance_positions(MobilityField& f, double dt);

struct ContactPair {
    uint32_t a = 0;
    uint32_t b = 0;  // a < b always

    bool operator==(const ContactPair&) const = default;
};

/// All pairs within radio reach: distance <= min(range[a], range[b]),
/// boundary inclusive. Output sorted by (a, b). The parallel version builds
/// per-a buckets and concatenates them in order, matching the serial output
/// exactly.
void detect_contacts_serial(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& range, std::vector<ContactPair>& out);
void detect_contacts_parallel(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& range, std::vector<ContactPair>& out);
void detect_contacts(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& range, std::vector<ContactPair>& out);

}  // namespace dropnet
