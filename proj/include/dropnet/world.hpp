#pragma once

// The whole park in one object: walking nodes, contact detection, per-link
// bandwidth-limited transfers, store-carry-forward routing of onion legs,
// the board, the mixers, and the traffic generator that drives sessions.
//
// One step advances the clock by time_step and runs, in order: move nodes,
// recompute contacts, progress and start transfers, process node inboxes
// (mixer ingest, board requests, reader receipts) and mixer flushes, then
// the traffic generator. All state mutation is sequential; a (config, seed)
// pair replays every event bit-exactly.
//
// Overlay vs DTN: an overlay message (WRITE, READ, RESPONSE) hops through
// its onion path one leg at a time. Each leg is a packet addressed to the
// next overlay hop and travels the park by direct handover or epidemic
// flooding, per Routing.mode. Relays therefore wait for their next hop to
// be met in direct mode, while in epidemic mode any contact opportunity
// flushes a mixer's buffer into the flood.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dropnet/board.hpp"
#include "dropnet/config.hpp"
#include "dropnet/kernels.hpp"
#include "dropnet/metrics.hpp"
#include "dropnet/mix.hpp"
#include "dropnet/protocol.hpp"

namespace dropnet {

enum class NodeRole : uint8_t { BoardNode, Mixer, Normal };

enum class TerminalState : uint8_t { InFlight, Delivered, Dropped };

enum class DropReason : uint8_t { None, BoardReject, PeelFailure, NoRoute, Malformed };

/// Scripted contact for oracle tests; both endpoints inclusive.
struct ContactWindow {
    uint32_t a = 0;
    uint32_t b = 0;
    double start = 0.0;
    double end = 0.0;
};

/// What the board can see when a request arrives: the clock, the node that
/// physically handed the bytes over (the last DTN carrier, not the origin),
/// and the request itself.
struct BoardAccess {
    double time = 0.0;
    uint32_t link_peer = 0;
    Bytes request;
};

struct ConservationCounts {
    uint64_t created = 0;
    uint64_t delivered = 0;
    uint64_t dropped = 0;
    uint64_t in_flight = 0;
};

class World {
public:
    World(const ScenarioConfig& cfg, uint64_t seed);

    void step();
    void run();  // steps until the configured duration

    double now() const { return now_; }
    const ScenarioConfig& config() const { return cfg_; }
    uint64_t seed() const { return seed_; }

    const MetricsLog& metrics() const { return metrics_; }
    Board& board() { return board_; }
    const std::vector<BoardAccess>& board_log() const { return board_log_; }

    ConservationCounts conservation() const;
    ConservationCounts conservation(MsgKind kind) const;
    uint64_t dropped_for(DropReason reason) const;
    uint64_t desyncs() const { return desyncs_; }

    NodeRole role(uint32_t node) const { return nodes_[node].role; }
    const MobilityField& field() const { return field_; }
    const std::vector<ContactPair>& contacts() const { return contacts_; }
    const std::vector<uint32_t>& mixer_pool() const { return mixer_pool_; }

    // Test hooks. The script replaces geometric contacts entirely; injected
    // messages are bare payloads carried to a node, bypassing the protocol.
    void set_contact_script(std::vector<ContactWindow> windows);
    uint64_t inject_message(uint32_t src, uint32_t dst, uint32_t size);
    void set_trace(std::ostream* sink) { trace_ = sink; }

private:
    struct MessageInfo {
        MsgKind kind = MsgKind::Write;
        uint32_t origin = 0;
        uint32_t terminal = 0;  // node whose consumption completes the message
        uint32_t mixers = 0;
        uint32_t session = UINT32_MAX;  // READ: owning session
        uint32_t position = 0;          // READ: chain position polled
        uint32_t response_mixers = 0;   // READ in strict mode: reply route length
        uint64_t parent = 0;            // RESPONSE: the READ it answers
        TerminalState state = TerminalState::InFlight;
        DropReason reason = DropReason::None;
    };

    struct OutItem {
        uint64_t leg_uid = 0;
        uint64_t root_uid = 0;
        uint32_t dest = 0;
        uint32_t wire_size = 0;
        std::shared_ptr<const Bytes> body;
        bool alive = true;
    };

    struct InboxItem {
        uint64_t leg_uid = 0;
        uint64_t root_uid = 0;
        uint32_t dest = 0;
        std::shared_ptr<const Bytes> body;
        uint32_t from = 0;
    };

    struct NodeRt {
        NodeRole role = NodeRole::Normal;
        std::vector<OutItem> outbound;
        std::vector<InboxItem> inbox;
        std::unordered_set<uint64_t> seen;  // leg uids carried or received
        crypto::MixKeyPair kp;              // mixers only
        MixerBuffer mixbuf;                 // mixers only
        Rng proto;                          // protocol and path randomness
    };

    struct Transfer {
        uint32_t from = 0;
        uint32_t to = 0;
        size_t out_index = 0;
        uint32_t steps_left = 0;
    };

    struct Session {
        uint32_t writer = 0;
        uint32_t reader = 0;
        SessionState wstate;
        SessionState rstate;
        CreditToken token{};
        uint32_t next_write = 1;  // message ordinal j, emitted at j * interval
        uint32_t read_pos = 1;    // chain position currently polled
        double next_poll_at = 0.0;
        bool awaiting = false;  // a poll is out, response not yet back
        double poll_sent_at = 0.0;
        bool desynced = false;
    };

    static uint64_t link_key(uint32_t a, uint32_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<uint64_t>(a) << 32) | b;
    }
    static uint64_t cursor_key(uint32_t from, uint32_t to) {
        return (static_cast<uint64_t>(from) << 32) | to;
    }

    uint64_t new_uid() { return next_uid_++; }
    Rng& proto_rng(uint32_t node) { return nodes_[node].proto; }

    void trace(const char* event, uint32_t node, uint64_t uid, const std::string& detail) const;

    Bytes make_payload(uint32_t session, uint32_t position) const;
    bool payload_matches(uint32_t session, uint32_t position, BytesView payload) const;

    // Wraps inner for terminal and hands the first leg to origin's buffer.
    // Strict-mode reads pass min_mixers = 1: the reader must never hand its
    // own request to the board in person.
    uint64_t emit_root(MsgKind kind, uint32_t origin, uint32_t terminal, BytesView inner,
                       uint64_t parent, bool carried_value, uint32_t min_mixers = 0);
    void add_leg(uint32_t carrier, uint64_t root_uid, const OnionPacket& pkt);

    void compute_contacts();
    void progress_transfers();
    void start_transfers();
    void process_inboxes();
    void flush_mixers();
    void run_traffic();

    void consume_at_board(const InboxItem& item);
    void consume_at_mixer(uint32_t node, const InboxItem& item);
    void consume_at_node(uint32_t node, const InboxItem& item);
    void emit_poll(uint32_t session_index);
    void deliver(uint64_t root_uid);
    void drop_message(uint64_t root_uid, DropReason reason, const std::string& note);

    ScenarioConfig cfg_;
    uint64_t seed_ = 0;
    double dt_ = 0.1;
    int64_t step_ = 0;
    int64_t total_steps_ = 0;
    double now_ = 0.0;

    Board board_;
    MobilityField field_;
    std::vector<double> ranges_;
    std::vector<NodeRt> nodes_;
    std::vector<uint32_t> mixer_pool_;
    MixKeyring keyring_;
    std::set<uint32_t> all_nodes_;

    std::vector<Session> sessions_;
    std::unordered_map<uint32_t, uint32_t> reader_session_;  // reader node -> session

    std::vector<ContactPair> contacts_;
    std::vector<std::vector<uint32_t>> adj_;
    std::unordered_set<uint64_t> links_;
    std::map<uint64_t, Transfer> transfers_;        // link key -> active transfer
    std::unordered_map<uint64_t, size_t> cursors_;  // (from,to) -> outbound scan position

    std::unordered_map<uint64_t, MessageInfo> messages_;
    uint64_t next_uid_ = 1;
    MetricsLog metrics_;
    std::vector<BoardAccess> board_log_;
    uint64_t desyncs_ = 0;

    std::vector<ContactWindow> script_;
    bool scripted_ = false;
    std::ostream* trace_ = nullptr;
};

}  // namespace dropnet
