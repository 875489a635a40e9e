#include <doctest.h>

#include <cmath>
#include <string>

#include "dropnet/runner.hpp"
#include "dropnet/world.hpp"

using namespace dropnet;

namespace {

// Five nodes: 0 is the board (unused), 1..4 form a scripted line.
ScenarioConfig line_config(RoutingMode mode) {
    ScenarioConfig cfg;
    cfg.width = 1000.0;
    cfg.height = 1000.0;
    cfg.time_step = 0.1;
    cfg.duration = 800.0;
    cfg.count = 5;
    cfg.mixers = 0;
    cfg.pairs = 0;
    cfg.bitrate = 1e8;
    cfg.mode = mode;
    cfg.name = "line";
    return cfg;
}

std::vector<ContactWindow> line_script() {
    return {
        {1, 2, 100.0, 160.0},
        {2, 3, 300.0, 360.0},
        {3, 4, 500.0, 560.0},
        {1, 4, 700.0, 760.0},
    };
}

double scripted_delivery(RoutingMode mode) {
    World world(line_config(mode), 9);
    world.set_contact_script(line_script());
    while (world.now() < 10.0 - 1e-9) world.step();
    const uint64_t uid = world.inject_message(1, 4, 1024);
    world.run();

    const auto* rec = world.metrics().find(uid);
    REQUIRE(rec != nullptr);
    REQUIRE(rec->delivered_at.has_value());
    return *rec->delivered_at;
}

std::string run_digest(const ScenarioConfig& cfg, uint64_t seed) {
    World world(cfg, seed);
    world.run();
    Report rep = compute_report(world.metrics(), cfg.name, seed, config_digest(cfg));
    return report_csv(rep) + to_hex(world.board().fingerprint());
}

}  // namespace

TEST_CASE("epidemic relaying rides the scripted contact chain") {
    // Hop-by-hop replication: 1>2 at 100, 2>3 at 300, 3>4 completes at 500.1
    // (one 0.1 s transfer step after the 500.0 contact).
    const double t = scripted_delivery(RoutingMode::Epidemic);
    CHECK(std::abs(t - 500.1) <= 0.1);
}

TEST_CASE("direct handover waits for the destination itself") {
    // Node 1 must keep the message until it meets node 4 at 700.
    const double t = scripted_delivery(RoutingMode::Direct);
    CHECK(std::abs(t - 700.1) <= 0.1);
    CHECK(scripted_delivery(RoutingMode::Epidemic) < t);
}

TEST_CASE("transfers on one link are sequential and bandwidth limited") {
    ScenarioConfig cfg = line_config(RoutingMode::Direct);
    cfg.count = 3;
    cfg.bitrate = 100.0;  // 10 bytes per 0.1 s step
    cfg.duration = 40.0;
    World world(cfg, 5);
    world.set_contact_script({{1, 2, 10.0, 12.0}});

    // Two 42-byte payloads, 50 bytes each on the wire: 5 steps per message.
    const uint64_t first = world.inject_message(1, 2, 42);
    const uint64_t second = world.inject_message(1, 2, 42);
    world.run();

    const auto* r1 = world.metrics().find(first);
    const auto* r2 = world.metrics().find(second);
    REQUIRE(r1->delivered_at.has_value());
    REQUIRE(r2->delivered_at.has_value());
    CHECK(*r1->delivered_at == doctest::Approx(10.5).epsilon(1e-9));
    CHECK(*r2->delivered_at == doctest::Approx(11.0).epsilon(1e-9));
}

TEST_CASE("a broken contact aborts the transfer and the carrier retries later") {
    ScenarioConfig cfg = line_config(RoutingMode::Direct);
    cfg.count = 3;
    cfg.bitrate = 100.0;
    cfg.duration = 40.0;
    World world(cfg, 5);
    // First window is too short for the 5 transfer steps; the second is not.
    world.set_contact_script({{1, 2, 10.0, 10.3}, {1, 2, 20.0, 22.0}});

    const uint64_t uid = world.inject_message(1, 2, 42);
    world.run();

    const auto* rec = world.metrics().find(uid);
    REQUIRE(rec->delivered_at.has_value());
    CHECK(*rec->delivered_at == doctest::Approx(20.5).epsilon(1e-9));

    ConservationCounts c = world.conservation();
    CHECK(c.created == 1);
    CHECK(c.delivered == 1);
    CHECK(c.dropped == 0);
    CHECK(c.in_flight == 0);
}

TEST_CASE("equal config and seed replay the identical simulation") {
    ScenarioConfig cfg = bundled_scenario1();
    cfg.duration = 4000.0;
    CHECK(run_digest(cfg, 3) == run_digest(cfg, 3));
    CHECK(run_digest(cfg, 3) != run_digest(cfg, 4));
}

TEST_CASE("a world without traffic still advances its clock") {
    ScenarioConfig cfg;
    cfg.count = 1;  // just the board
    cfg.mixers = 0;
    cfg.pairs = 0;
    cfg.duration = 5.0;
    World world(cfg, 1);
    for (int i = 0; i < 10; ++i) world.step();
    CHECK(world.now() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(world.metrics().records().empty());
    CHECK(world.conservation().created == 0);
    world.run();
    CHECK(world.now() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("node roles partition the population") {
    ScenarioConfig cfg = bundled_scenario1();
    cfg.duration = 1.0;
    World world(cfg, 1);
    CHECK(world.role(0) == NodeRole::BoardNode);
    uint32_t mixers = 0, normals = 0;
    for (uint32_t n = 1; n < cfg.count; ++n) {
        if (world.role(n) == NodeRole::Mixer) mixers += 1;
        if (world.role(n) == NodeRole::Normal) normals += 1;
    }
    CHECK(mixers == cfg.mixers);
    CHECK(normals == cfg.count - 1 - cfg.mixers);
    CHECK(world.mixer_pool().size() == cfg.mixers);
    CHECK(world.field().size() == cfg.count);
}

TEST_CASE("conservation and metrics reconcile after a real run") {
    ScenarioConfig cfg = bundled_scenario1();
    cfg.duration = 6000.0;
    World world(cfg, 7);
    world.run();

    ConservationCounts all = world.conservation();
    CHECK(all.created > 0);
    CHECK(all.created == all.delivered + all.dropped + all.in_flight);

    uint64_t created_sum = 0, delivered_sum = 0;
    for (MsgKind kind : {MsgKind::Write, MsgKind::Read, MsgKind::Response}) {
        ConservationCounts c = world.conservation(kind);
        CHECK(c.created == c.delivered + c.dropped + c.in_flight);
        CHECK(c.created == world.metrics().created_count(kind));
        CHECK(c.delivered == world.metrics().delivered_count(kind));
        created_sum += c.created;
        delivered_sum += c.delivered;
    }
    CHECK(created_sum == all.created);
    CHECK(delivered_sum == all.delivered);

    const uint64_t dropped_sum =
        world.dropped_for(DropReason::BoardReject) + world.dropped_for(DropReason::PeelFailure) +
        world.dropped_for(DropReason::NoRoute) + world.dropped_for(DropReason::Malformed);
    CHECK(dropped_sum == all.dropped);
    CHECK(world.desyncs() == 0);
}

TEST_CASE("the traffic generator follows the write schedule exactly") {
    // 20 pairs writing every 300 s for 12 h: 144 messages per writer.
    ScenarioConfig cfg;
    cfg.count = 51;
    cfg.mixers = 10;
    cfg.pairs = 20;
    cfg.write_interval = 300.0;
    cfg.duration = 43200.0;
    cfg.payload = 64;
    cfg.mode = RoutingMode::Direct;
    cfg.name = "schedule";
    World world(cfg, 2);

    while (world.now() < 299.9 - 1e-9) world.step();
    CHECK(world.metrics().created_count(MsgKind::Write) == 0);
    world.step();  // the step landing exactly on 300 s emits the first round
    CHECK(world.metrics().created_count(MsgKind::Write) == 20);

    world.run();
    CHECK(world.metrics().created_count(MsgKind::Write) == 20 * 144);
}

TEST_CASE("strict replies change the wire but not the bookkeeping") {
    ScenarioConfig cfg = bundled_scenario1();
    cfg.duration = 6000.0;
    cfg.strict_replies = true;
    World world(cfg, 7);
    world.run();

    CHECK(world.desyncs() == 0);
    ConservationCounts all = world.conservation();
    CHECK(all.created == all.delivered + all.dropped + all.in_flight);
    CHECK_FALSE(world.board_log().empty());

    // Every READ that reached the board carried a reply route.
    size_t reads = 0;
    for (const BoardAccess& access : world.board_log()) {
        if (auto read = ReadRequest::parse(access.request)) {
            reads += 1;
            CHECK_FALSE(read->route.empty());
        }
    }
    CHECK(reads > 0);
}
