#include "dropnet/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dropnet {
namespace {

constexpr double kEps = 1e-9;

enum StreamDomain : uint64_t { kSetupStream = 1, kMobilityStream = 2, kProtoStream = 3 };

uint64_t stream_id(StreamDomain d, uint32_t node) {
    return (static_cast<uint64_t>(d) << 32) | node;
}

uint32_t leg_size(const Bytes& body) {
    // Link framing: next-hop id plus length, then the packet body.
    return static_cast<uint32_t>(body.size() + 8);
}

uint32_t transfer_steps(uint32_t size, double bitrate, double dt) {
    const double steps = std::ceil(static_cast<double>(size) / (bitrate * dt));
    return steps < 1.0 ? 1u : static_cast<uint32_t>(steps);
}

const char* status_name(WriteStatus st) {
    switch (st) {
        case WriteStatus::Ok: return "ok";
        case WriteStatus::ErrOutOfRange: return "out_of_range";
        case WriteStatus::ErrOccupied: return "occupied";
        case WriteStatus::ErrNoCredit: return "no_credit";
    }
    return "?";
}

}  // namespace

World::World(const ScenarioConfig& cfg, uint64_t seed)
    : cfg_(cfg), seed_(seed), dt_(cfg.time_step), board_(cfg.cells, cfg.credits) {
    total_steps_ = std::llround(cfg.duration / dt_);
    if (cfg.count > 0 && cfg.count < 1 + cfg.mixers) {
        throw std::invalid_argument("node count cannot cover board plus mixers");
    }
    if (cfg.pairs > 0 && cfg.count < 1 + cfg.mixers + 2 * cfg.pairs) {
        throw std::invalid_argument("not enough normal nodes for the traffic pairs");
    }
    if (cfg.pairs > 0 && cfg.strict_replies && cfg.mixers == 0) {
        throw std::invalid_argument("strict replies need at least one mixer");
    }

    Rng setup = stream_rng(seed_, stream_id(kSetupStream, 0));

    field_.width = cfg.width;
    field_.height = cfg.height;
    field_.v_min = cfg.v_min;
    field_.v_max = cfg.v_max;

    nodes_.resize(cfg.count);
    adj_.resize(cfg.count);
    ranges_.assign(cfg.count, cfg.range);
    for (uint32_t id = 0; id < cfg.count; ++id) {
        const double px = next_range(setup, 0.0, cfg.width);
        const double py = next_range(setup, 0.0, cfg.height);
        const bool frozen = id == 0 && cfg.board_stationary;
        field_.add_node(px, py, frozen, stream_rng(seed_, stream_id(kMobilityStream, id)));
        nodes_[id].proto = stream_rng(seed_, stream_id(kProtoStream, id));
        all_nodes_.insert(id);
    }
    if (cfg.count > 0) nodes_[0].role = NodeRole::BoardNode;
    for (uint32_t id = 1; id <= cfg.mixers && id < cfg.count; ++id) {
        nodes_[id].role = NodeRole::Mixer;
        nodes_[id].kp = crypto::MixKeyPair::generate(id, setup);
        keyring_[id] = nodes_[id].kp.public_key;
        mixer_pool_.push_back(id);
    }

    // Writer/reader pairs take the first normal ids in order. Initial cells
    // are redrawn until distinct across sessions: partners agreeing on a
    // first cell in person can trivially avoid a known clash.
    std::set<uint32_t> taken;
    for (uint32_t i = 0; i < cfg.pairs; ++i) {
        Session s;
        s.writer = 1 + cfg.mixers + 2 * i;
        s.reader = s.writer + 1;
        for (;;) {
            auto [w, r] = establish_session(s.writer, s.reader, cfg.cells, setup);
            if (taken.insert(w.next_index).second) {
                s.wstate = w;
                s.rstate = r;
                break;
            }
        }
        auto token = board_.register_client(setup);
        if (!token) throw std::runtime_error("credit token collision at setup");
        s.token = *token;
        s.next_poll_at = cfg.write_interval + cfg.read_lag;
        reader_session_.emplace(s.reader, i);
        sessions_.push_back(s);
    }
}

void World::step() {
    step_ += 1;
    now_ = static_cast<double>(step_) * dt_;
    advance_positions(field_, dt_);
    compute_contacts();
    progress_transfers();
    start_transfers();
    process_inboxes();
    flush_mixers();
    run_traffic();
}

void World::run() {
    while (step_ < total_steps_) step();
}

void World::set_contact_script(std::vector<ContactWindow> windows) {
    script_ = std::move(windows);
    scripted_ = true;
}

uint64_t World::inject_message(uint32_t src, uint32_t dst, uint32_t size) {
    const uint64_t uid = new_uid();
    MessageInfo info;
    info.kind = MsgKind::Write;
    info.origin = src;
    info.terminal = dst;
    messages_.emplace(uid, info);
    metrics_.record_created(uid, MsgKind::Write, 0, now_);
    Bytes body(std::max<uint32_t>(size, 1), 0);
    // Filler with a zero first byte, so it can never parse as a wire kind.
    for (size_t k = 1; k < body.size(); ++k) {
        body[k] = static_cast<uint8_t>((uid * 131 + k) & 0xff);
    }
    add_leg(src, uid, OnionPacket{dst, std::move(body)});
    trace("inject", src, uid, "to " + std::to_string(dst));
    return uid;
}

void World::trace(const char* event, uint32_t node, uint64_t uid,
                  const std::string& detail) const {
    if (!trace_) return;
    char t[32];
    std::snprintf(t, sizeof t, "%.1f", now_);
    *trace_ << t << ',' << event << ',' << node << ',' << uid << ',' << detail << '\n';
}

Bytes World::make_payload(uint32_t session, uint32_t position) const {
    Bytes p;
    p.push_back(0x00);
    put_u32(p, session);
    put_u32(p, position);
    const size_t target = std::max<size_t>(cfg_.payload, p.size());
    while (p.size() < target) {
        p.push_back(static_cast<uint8_t>((p.size() * 37 + session + position) & 0xff));
    }
    return p;
}

bool World::payload_matches(uint32_t session, uint32_t position, BytesView payload) const {
    const Bytes expect = make_payload(session, position);
    return payload.size() == expect.size() &&
           std::equal(payload.begin(), payload.end(), expect.begin());
}

uint64_t World::emit_root(MsgKind kind, uint32_t origin, uint32_t terminal, BytesView inner,
                          uint64_t parent, bool carried_value, uint32_t min_mixers) {
    Rng& rng = proto_rng(origin);
    const MixPath path = build_path(rng, mixer_pool_, terminal, cfg_.max_mixers, min_mixers);
    OnionPacket pkt = onion_wrap(path, inner, keyring_, rng);
    const uint64_t uid = new_uid();
    MessageInfo info;
    info.kind = kind;
    info.origin = origin;
    info.terminal = terminal;
    info.mixers = static_cast<uint32_t>(path.mixer_count());
    info.parent = parent;
    messages_.emplace(uid, info);
    metrics_.record_created(uid, kind, info.mixers, now_, parent, carried_value);
    add_leg(origin, uid, pkt);
    trace("create", origin, uid, kind_name(kind));
    return uid;
}

void World::add_leg(uint32_t carrier, uint64_t root_uid, const OnionPacket& pkt) {
    const uint64_t leg = new_uid();
    auto body = std::make_shared<const Bytes>(pkt.body);
    nodes_[carrier].outbound.push_back(
        {leg, root_uid, pkt.next_hop, leg_size(*body), std::move(body), true});
    nodes_[carrier].seen.insert(leg);
}

void World::compute_contacts() {
    contacts_.clear();
    if (scripted_) {
        for (const auto& w : script_) {
            if (w.start - kEps <= now_ && now_ <= w.end + kEps) {
                contacts_.push_back({std::min(w.a, w.b), std::max(w.a, w.b)});
            }
        }
        std::sort(contacts_.begin(), contacts_.end(),
                  [](const ContactPair& l, const ContactPair& r) {
                      return l.a != r.a ? l.a < r.a : l.b < r.b;
                  });
        contacts_.erase(std::unique(contacts_.begin(), contacts_.end()), contacts_.end());
    } else {
        detect_contacts(field_.x, field_.y, ranges_, contacts_);
    }
    for (auto& v : adj_) v.clear();
    links_.clear();
    for (const auto& c : contacts_) {
        adj_[c.a].push_back(c.b);
        adj_[c.b].push_back(c.a);
        links_.insert(link_key(c.a, c.b));
    }
}

void World::progress_transfers() {
    // A broken contact aborts its transfer; the carrier keeps the message
    // and the scan cursor backs up so the leg is offered again later.
    for (auto it = transfers_.begin(); it != transfers_.end();) {
        if (!links_.count(it->first)) {
            auto cur = cursors_.find(cursor_key(it->second.from, it->second.to));
            if (cur != cursors_.end() && cur->second > it->second.out_index) {
                cur->second = it->second.out_index;
            }
            it = transfers_.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = transfers_.begin(); it != transfers_.end();) {
        Transfer& tr = it->second;
        if (--tr.steps_left > 0) {
            ++it;
            continue;
        }
        OutItem& item = nodes_[tr.from].outbound[tr.out_index];
        NodeRt& recv = nodes_[tr.to];
        // A replica may have arrived from another carrier mid-transfer.
        if (recv.seen.insert(item.leg_uid).second) {
            recv.inbox.push_back({item.leg_uid, item.root_uid, item.dest, item.body, tr.from});
            trace("transfer", tr.to, item.root_uid, "from " + std::to_string(tr.from));
        }
        if (cfg_.mode == RoutingMode::Direct) item.alive = false;  // handed over
        it = transfers_.erase(it);
    }
}

void World::start_transfers() {
    const bool epidemic = cfg_.mode == RoutingMode::Epidemic;
    for (uint32_t a = 0; a < nodes_.size(); ++a) {
        auto& out = nodes_[a].outbound;
        if (out.empty()) continue;
        for (uint32_t b : adj_[a]) {
            const uint64_t lk = link_key(a, b);
            if (transfers_.count(lk)) continue;
            size_t& cur = cursors_[cursor_key(a, b)];
            const auto& peer_seen = nodes_[b].seen;
            while (cur < out.size()) {
                const OutItem& item = out[cur];
                // Skips are permanent for this peer (seen only grows, dead
                // stays dead, the destination never changes), so the cursor
                // never has to revisit them.
                if (item.alive && (epidemic || item.dest == b) && !peer_seen.count(item.leg_uid)) {
                    break;
                }
                ++cur;
            }
            if (cur >= out.size()) continue;
            transfers_[lk] = {a, b, cur, transfer_steps(out[cur].wire_size, cfg_.bitrate, dt_)};
            ++cur;
        }
    }
}

void World::process_inboxes() {
    for (uint32_t id = 0; id < nodes_.size(); ++id) {
        std::vector<InboxItem> inbox = std::move(nodes_[id].inbox);
        nodes_[id].inbox.clear();
        for (InboxItem& item : inbox) {
            if (item.dest != id) {
                // Not for this node: carry the replica onward.
                nodes_[id].outbound.push_back(
                    {item.leg_uid, item.root_uid, item.dest, leg_size(*item.body), item.body,
                     true});
                continue;
            }
            switch (nodes_[id].role) {
                case NodeRole::BoardNode: consume_at_board(item); break;
                case NodeRole::Mixer: consume_at_mixer(id, item); break;
                case NodeRole::Normal: consume_at_node(id, item); break;
            }
        }
    }
}

void World::consume_at_board(const InboxItem& item) {
    board_log_.push_back({now_, item.from, *item.body});
    const Bytes& wire = *item.body;
    // Copy: inserting the response record may rehash the message table.
    const MessageInfo root = messages_.at(item.root_uid);

    if (!wire.empty() && wire[0] == kKindWrite) {
        auto req = WriteRequest::parse(wire);
        if (!req) {
            drop_message(item.root_uid, DropReason::Malformed, "unparseable write");
            return;
        }
        const WriteStatus st = board_.apply_write(*req);
        if (st == WriteStatus::Ok) {
            deliver(item.root_uid);
            trace("board_write", 0, item.root_uid, "ok");
        } else {
            drop_message(item.root_uid, DropReason::BoardReject, status_name(st));
        }
        return;
    }

    if (!wire.empty() && wire[0] == kKindRead) {
        auto req = ReadRequest::parse(wire);
        if (!req) {
            drop_message(item.root_uid, DropReason::Malformed, "unparseable read");
            return;
        }
        ReadResult rr = board_.apply_read(*req);
        deliver(item.root_uid);  // read delivery is arrival, full cell or not
        trace("board_read", 0, item.root_uid, rr.is_null() ? "null" : "value");

        Response resp;
        resp.has_value = !rr.is_null();
        if (rr.value) resp.value = std::move(*rr.value);

        const ResponseMode mode =
            cfg_.strict_replies ? ResponseMode::Strict : ResponseMode::Paper;
        auto routed = route_response(mode, *req, root.origin, resp, proto_rng(0), mixer_pool_,
                                     keyring_, cfg_.max_mixers);
        const uint32_t resp_mixers = mode == ResponseMode::Paper
                                         ? (routed ? routed->mixers : 0)
                                         : root.response_mixers;
        const uint64_t ruid = new_uid();
        MessageInfo rinfo;
        rinfo.kind = MsgKind::Response;
        rinfo.origin = 0;
        rinfo.terminal = root.origin;
        rinfo.mixers = resp_mixers;
        rinfo.parent = item.root_uid;
        messages_.emplace(ruid, rinfo);
        metrics_.record_created(ruid, MsgKind::Response, resp_mixers, now_, item.root_uid,
                                resp.has_value);
        if (routed) {
            add_leg(0, ruid, routed->packet);
            trace("response", 0, ruid, resp.has_value ? "value" : "null");
        } else {
            drop_message(ruid, DropReason::NoRoute, "missing reply route");
        }
        return;
    }

    drop_message(item.root_uid, DropReason::Malformed, "unknown request kind");
}

void World::consume_at_mixer(uint32_t node, const InboxItem& item) {
    NodeRt& n = nodes_[node];
    const auto rc = n.mixbuf.ingest(n.kp, OnionPacket{item.dest, *item.body}, now_,
                                    item.root_uid);
    if (rc == MixerBuffer::Ingest::Buffered) {
        trace("mix_ingest", node, item.root_uid, "");
        return;
    }
    drop_message(item.root_uid, DropReason::PeelFailure,
                 "peel failed at mixer " + std::to_string(node));
}

void World::consume_at_node(uint32_t node, const InboxItem& item) {
    const MessageInfo root = messages_.at(item.root_uid);
    if (root.kind != MsgKind::Response) {
        deliver(item.root_uid);  // injected bare payload reached its terminal
        trace("deliver", node, item.root_uid, "");
        return;
    }
    auto resp = Response::parse(*item.body);
    if (!resp) {
        drop_message(item.root_uid, DropReason::Malformed, "unparseable response");
        return;
    }
    deliver(item.root_uid);
    trace("deliver", node, item.root_uid, resp->has_value ? "value" : "null");

    const MessageInfo read_root = messages_.at(root.parent);
    if (read_root.session == UINT32_MAX) return;
    Session& s = sessions_[read_root.session];
    if (s.desynced || read_root.position != s.read_pos) return;  // stale poll answer

    if (!resp->has_value) {
        s.awaiting = false;
        s.next_poll_at = now_ + cfg_.poll_interval;
        return;
    }
    const HandleOutcome h = handle_response(s.rstate, *resp);
    if (h.status == HandleStatus::Delivered &&
        payload_matches(read_root.session, s.read_pos, h.payload)) {
        s.rstate = h.next;
        s.read_pos += 1;
        s.awaiting = false;
        s.next_poll_at = std::max(
            now_, static_cast<double>(s.read_pos) * cfg_.write_interval + cfg_.read_lag);
    } else {
        s.desynced = true;
        desyncs_ += 1;
        trace("desync", node, item.root_uid, "");
    }
}

void World::flush_mixers() {
    const bool epidemic = cfg_.mode == RoutingMode::Epidemic;
    for (uint32_t m : mixer_pool_) {
        if (adj_[m].empty()) continue;  // no contact opportunity this step
        NodeRt& n = nodes_[m];
        if (n.mixbuf.pending() == 0) continue;
        std::set<uint32_t> reachable;
        if (epidemic) {
            // The flood layer forwards to any next hop; a contact is only
            // the opportunity to start spreading.
            reachable = all_nodes_;
        } else {
            reachable.insert(adj_[m].begin(), adj_[m].end());
        }
        for (auto& em : n.mixbuf.flush(n.proto, reachable, cfg_.batch_threshold)) {
            add_leg(m, em.tag, em.pkt);
            trace("mix_flush", m, em.tag, "next " + std::to_string(em.pkt.next_hop));
        }
    }
}

void World::run_traffic() {
    for (uint32_t i = 0; i < sessions_.size(); ++i) {
        Session& s = sessions_[i];
        while (static_cast<double>(s.next_write) * cfg_.write_interval <= now_ + kEps) {
            const Bytes payload = make_payload(i, s.next_write);
            WriteOutcome out = prepare_write(s.wstate, payload, proto_rng(s.writer), s.token);
            s.wstate = out.next;
            emit_root(MsgKind::Write, s.writer, 0, out.request.serialize(), 0, false);
            s.next_write += 1;
        }
        if (s.desynced) continue;
        if (!s.awaiting && now_ + kEps >= s.next_poll_at) {
            emit_poll(i);
        } else if (s.awaiting && now_ - s.poll_sent_at + kEps >= cfg_.poll_timeout) {
            emit_poll(i);  // response overdue; the request is idempotent
        }
    }
}

void World::emit_poll(uint32_t session_index) {
    Session& s = sessions_[session_index];
    ReadRequest req = prepare_read(s.rstate);
    uint32_t resp_mixers = 0;
    if (cfg_.strict_replies) {
        ReplyRoute route = build_reply_route(proto_rng(s.reader), mixer_pool_, keyring_,
                                             s.reader, cfg_.max_mixers);
        req.route = std::move(route.wire);
        resp_mixers = route.mixers;
    }
    const uint64_t uid = emit_root(MsgKind::Read, s.reader, 0, req.serialize(), 0, false,
                                   cfg_.strict_replies ? 1u : 0u);
    MessageInfo& info = messages_.at(uid);
    info.session = session_index;
    info.position = s.read_pos;
    info.response_mixers = resp_mixers;
    s.awaiting = true;
    s.poll_sent_at = now_;
}

void World::deliver(uint64_t root_uid) {
    messages_.at(root_uid).state = TerminalState::Delivered;
    metrics_.record_delivered(root_uid, now_);
}

void World::drop_message(uint64_t root_uid, DropReason reason, const std::string& note) {
    MessageInfo& m = messages_.at(root_uid);
    m.state = TerminalState::Dropped;
    m.reason = reason;
    trace("drop", m.origin, root_uid, note);
}

ConservationCounts World::conservation() const {
    ConservationCounts c;
    for (const auto& [uid, m] : messages_) {
        c.created += 1;
        switch (m.state) {
            case TerminalState::Delivered: c.delivered += 1; break;
            case TerminalState::Dropped: c.dropped += 1; break;
            case TerminalState::InFlight: c.in_flight += 1; break;
        }
    }
    return c;
}

ConservationCounts World::conservation(MsgKind kind) const {
    ConservationCounts c;
    for (const auto& [uid, m] : messages_) {
        if (m.kind != kind) continue;
        c.created += 1;
        switch (m.state) {
            case TerminalState::Delivered: c.delivered += 1; break;
            case TerminalState::Dropped: c.dropped += 1; break;
            case TerminalState::InFlight: c.in_flight += 1; break;
        }
    }
    return c;
}

uint64_t World::dropped_for(DropReason reason) const {
    uint64_t n = 0;
    for (const auto& [uid, m] : messages_) {
        n += m.state == TerminalState::Dropped && m.reason == reason;
    }
    return n;
}

}  // namespace dropnet
