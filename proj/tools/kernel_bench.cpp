// Times the serial and OpenMP variants of the two mobility kernels on
// synthetic node sets and checks that they agree bitwise while at it.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <vector>

#include "dropnet/kernels.hpp"
#include "dropnet/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

dropnet::MobilityField make_field(size_t nodes, uint64_t seed) {
    dropnet::MobilityField field{5000.0, 5000.0, 0.5, 2.0};
    dropnet::Rng setup = dropnet::seeded_rng(seed);
    for (size_t i = 0; i < nodes; ++i) {
        double px = dropnet::next_unit(setup) * field.width;
        double py = dropnet::next_unit(setup) * field.height;
        field.add_node(px, py, false, dropnet::stream_rng(seed, 1000 + i));
    }
    return field;
}

bool same_positions(const dropnet::MobilityField& a, const dropnet::MobilityField& b) {
    return std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0 &&
           std::memcmp(a.y.data(), b.y.data(), a.y.size() * sizeof(double)) == 0;
}

void bench_positions(size_t nodes, int steps) {
    dropnet::MobilityField serial = make_field(nodes, 42);
    dropnet::MobilityField parallel = make_field(nodes, 42);

    auto t0 = Clock::now();
    for (int s = 0; s < steps; ++s) dropnet::advance_positions_serial(serial, 0.1);
    double ts = seconds_since(t0);

    t0 = Clock::now();
    for (int s = 0; s < steps; ++s) dropnet::advance_positions_parallel(parallel, 0.1);
    double tp = seconds_since(t0);

    const char* match = same_positions(serial, parallel) ? "yes" : "NO";
    std::printf("advance_positions %8zu nodes x %4d steps  serial %8.3fs  parallel %8.3fs  "
                "speedup %5.2fx  match %s\n",
                nodes, steps, ts, tp, tp > 0 ? ts / tp : 0.0, match);
}

void bench_contacts(size_t nodes, int reps) {
    dropnet::MobilityField field = make_field(nodes, 7);
    std::vector<double> range(nodes, 25.0);
    std::vector<dropnet::ContactPair> serial, parallel;

    auto t0 = Clock::now();
    for (int s = 0; s < reps; ++s) dropnet::detect_contacts_serial(field.x, field.y, range, serial);
    double ts = seconds_since(t0);

    t0 = Clock::now();
    for (int s = 0; s < reps; ++s)
        dropnet::detect_contacts_parallel(field.x, field.y, range, parallel);
    double tp = seconds_since(t0);

    bool match = serial.size() == parallel.size() &&
                 std::memcmp(serial.data(), parallel.data(),
                             serial.size() * sizeof(dropnet::ContactPair)) == 0;
    std::printf("detect_contacts   %8zu nodes x %4d reps   serial %8.3fs  parallel %8.3fs  "
                "speedup %5.2fx  pairs %zu  match %s\n",
                nodes, reps, ts, tp, tp > 0 ? ts / tp : 0.0, serial.size(), match ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled\n");
#else
    std::printf("OpenMP disabled; parallel variants fall back to serial\n");
#endif
    for (size_t nodes : {1000ul, 4000ul, 16000ul}) bench_positions(nodes, 200);
    for (size_t nodes : {1000ul, 4000ul, 16000ul}) bench_contacts(nodes, 20);
    return 0;
}
