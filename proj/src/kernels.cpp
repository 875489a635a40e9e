#include "dropnet/kernels.hpp"

#include <cmath>

namespace dropnet {
namespace {

// Below this the OpenMP fork/join overhead outweighs the loop body.
constexpr size_t kParallelCutoff = 512;

void redraw_leg(MobilityField& f, size_t i) {
    f.wx[i] = next_range(f.rng[i], 0.0, f.width);
    f.wy[i] = next_range(f.rng[i], 0.0, f.height);
    f.speed[i] = next_range(f.rng[i], f.v_min, f.v_max);
}

void step_node(MobilityField& f, size_t i, double dt) {
    if (f.frozen[i]) return;
    const double dx = f.wx[i] - f.x[i];
    const double dy = f.wy[i] - f.y[i];
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist == 0.0) {
        // On the waypoint: pick the next leg, move starting next step.
        redraw_leg(f, i);
        return;
    }
    const double step = f.speed[i] * dt;
    if (step >= dist) {
        f.x[i] = f.wx[i];
        f.y[i] = f.wy[i];
    } else {
        f.x[i] += dx / dist * step;
        f.y[i] += dy / dist * step;
    }
}

}  // namespace

void MobilityField::add_node(double px, double py, bool stationary, Rng stream) {
    x.push_back(px);
    y.push_back(py);
    wx.push_back(0.0);
    wy.push_back(0.0);
    speed.push_back(0.0);
    frozen.push_back(stationary ? 1 : 0);
    rng.push_back(std::move(stream));
    const size_t i = size() - 1;
    wx[i] = next_range(rng[i], 0.0, width);
    wy[i] = next_range(rng[i], 0.0, height);
    speed[i] = next_range(rng[i], v_min, v_max);
}

void advance_positions_serial(MobilityField& f, double dt) {
    for (size_t i = 0; i < f.size(); ++i) step_node(f, i, dt);
}

void advance_positions_parallel(MobilityField& f, double dt) {
    const int64_t n = static_cast<int64_t>(f.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) step_node(f, static_cast<size_t>(i), dt);
}

void advance_positions(MobilityField& f, double dt) {
    if (f.size() >= kParallelCutoff) {
        advance_positions_parallel(f, dt);
    } else {
        advance_positions_serial(f, dt);
    }
}

namespace {

inline bool in_reach(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& range, size_t i, size_t j) {
    const double dx = x[i] - x[j];
    const double dy = y[i] - y[j];
    const double r = range[i] < range[j] ? range[i] : range[j];
    return dx * dx + dy * dy <= r * r;
}

}  // namespace

void detect_contacts_serial(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& range, std::vector<ContactPair>& out) {
    out.clear();
    const size_t n = x.size();
    for (size_t i = 0; i + 1 < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (in_reach(x, y, range, i, j)) {
                out.push_back({static_cast<uint32_t>(i), static_cast<uint32_t>(j)});
            }
        }
    }
}

void detect_contacts_parallel(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& range, std::vector<ContactPair>& out) {
    out.clear();
    const size_t n = x.size();
    if (n < 2) return;
    std::vector<std::vector<ContactPair>> buckets(n - 1);
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t i = 0; i < static_cast<int64_t>(n) - 1; ++i) {
        auto& bucket = buckets[static_cast<size_t>(i)];
        for (size_t j = static_cast<size_t>(i) + 1; j < n; ++j) {
            if (in_reach(x, y, range, static_cast<size_t>(i), j)) {
                bucket.push_back({static_cast<uint32_t>(i), static_cast<uint32_t>(j)});
            }
        }
    }
    for (const auto& bucket : buckets) out.insert(out.end(), bucket.begin(), bucket.end());
}

void detect_contacts(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& range, std::vector<ContactPair>& out) {
    if (x.size() >= kParallelCutoff) {
        detect_contacts_parallel(x, y, range, out);
    } else {
        detect_contacts_serial(x, y, range, out);
    }
}

}  // namespace dropnet
