#include "dropnet/mix.hpp"

#include <algorithm>
#include <stdexcept>

namespace dropnet {
namespace {

const std::array<uint8_t, 32>& keyring_lookup(const MixKeyring& keyring, uint32_t id) {
    auto it = keyring.find(id);
    if (it == keyring.end()) {
        throw std::invalid_argument("no public key for mixer " + std::to_string(id));
    }
    return it->second;
}

Bytes layer_plain(uint32_t next_hop, BytesView body) {
    Bytes out;
    out.reserve(8 + body.size());
    put_u32(out, next_hop);
    put_u32(out, static_cast<uint32_t>(body.size()));
    put_bytes(out, body);
    return out;
}

std::optional<OnionPacket> parse_layer_plain(BytesView plain) {
    ByteReader r(plain);
    OnionPacket pkt;
    uint32_t len = 0;
    if (!r.get_u32(pkt.next_hop)) return std::nullopt;
    if (!r.get_u32(len) || !r.get_vector(pkt.body, len)) return std::nullopt;
    if (!r.done()) return std::nullopt;
    return pkt;
}

// Partial Fisher-Yates: first k slots hold a uniform sample without
// replacement.
std::vector<uint32_t> sample_mixers(Rng& rng, std::vector<uint32_t> pool, uint32_t k) {
    for (uint32_t i = 0; i < k; ++i) {
        const uint32_t j = i + next_below(rng, static_cast<uint32_t>(pool.size()) - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace

MixPath build_path(Rng& rng, const std::vector<uint32_t>& mixer_pool, uint32_t terminal,
                   uint32_t max_mixers, uint32_t min_mixers) {
    const uint32_t cap = std::min<uint32_t>(std::min<uint32_t>(kMaxMixers, max_mixers),
                                            static_cast<uint32_t>(mixer_pool.size()));
    const uint32_t lo = std::min(min_mixers, cap);
    const uint32_t k = lo + next_below(rng, cap - lo + 1);
    MixPath path;
    path.hops = sample_mixers(rng, mixer_pool, k);
    path.hops.push_back(terminal);
    return path;
}

OnionPacket onion_wrap(const MixPath& path, BytesView inner, const MixKeyring& keyring,
                       Rng& rng) {
    // Build from the inside out: the terminal's bytes get sealed to the last
    // mixer, then each earlier mixer wraps the result.
    Bytes body(inner.begin(), inner.end());
    uint32_t next_hop = path.terminal();
    for (size_t i = path.mixer_count(); i-- > 0;) {
        const uint32_t mixer = path.hops[i];
        Bytes plain = layer_plain(next_hop, body);
        body = crypto::layer_encrypt(keyring_lookup(keyring, mixer), plain, rng);
        next_hop = mixer;
    }
    return OnionPacket{next_hop, std::move(body)};
}

std::optional<OnionPacket> onion_peel(const crypto::MixKeyPair& kp, BytesView body) {
    auto plain = crypto::layer_decrypt(kp, body);
    if (!plain) return std::nullopt;
    return parse_layer_plain(*plain);
}

std::optional<OnionPacket> peel_reply(const crypto::MixKeyPair& kp, BytesView body) {
    ByteReader r(body);
    uint8_t frame = 0;
    if (!r.get_u8(frame) || frame != kReplyFrame) return std::nullopt;
    uint32_t route_len = 0;
    Bytes route;
    if (!r.get_u32(route_len) || !r.get_vector(route, route_len)) return std::nullopt;
    Bytes response;
    r.get_vector(response, r.remaining());

    auto plain = crypto::layer_decrypt(kp, route);
    if (!plain) return std::nullopt;
    auto inner = parse_layer_plain(*plain);
    if (!inner) return std::nullopt;

    OnionPacket out;
    out.next_hop = inner->next_hop;
    if (inner->body.empty()) {
        // Last relay: hand the bare response to the reader.
        out.body = std::move(response);
    } else {
        out.body.push_back(kReplyFrame);
        put_u32(out.body, static_cast<uint32_t>(inner->body.size()));
        put_bytes(out.body, inner->body);
        put_bytes(out.body, response);
    }
    return out;
}

ReplyRoute build_reply_route(Rng& rng, const std::vector<uint32_t>& mixer_pool,
                             const MixKeyring& keyring, uint32_t reader_id,
                             uint32_t max_mixers) {
    const uint32_t cap = std::min<uint32_t>(std::min<uint32_t>(kMaxMixers, max_mixers),
                                            static_cast<uint32_t>(mixer_pool.size()));
    if (cap == 0) throw std::invalid_argument("a reply route needs at least one mixer");
    const uint32_t k = 1 + next_below(rng, cap);  // never 0: see header
    std::vector<uint32_t> mixers = sample_mixers(rng, mixer_pool, k);

    // Innermost layer points at the reader with an empty remainder.
    Bytes blob = crypto::layer_encrypt(keyring_lookup(keyring, mixers[k - 1]),
                                       layer_plain(reader_id, {}), rng);
    for (size_t i = k - 1; i-- > 0;) {
        blob = crypto::layer_encrypt(keyring_lookup(keyring, mixers[i]),
                                     layer_plain(mixers[i + 1], blob), rng);
    }

    ReplyRoute route;
    route.mixers = k;
    put_u32(route.wire, mixers[0]);
    put_bytes(route.wire, blob);
    return route;
}

std::optional<RoutedResponse> route_response(ResponseMode mode, const ReadRequest& req,
                                             uint32_t reader_id, const Response& resp, Rng& rng,
                                             const std::vector<uint32_t>& mixer_pool,
                                             const MixKeyring& keyring, uint32_t max_mixers) {
    if (mode == ResponseMode::Paper) {
        MixPath path = build_path(rng, mixer_pool, reader_id, max_mixers);
        RoutedResponse out;
        out.packet = onion_wrap(path, resp.serialize(), keyring, rng);
        out.mixers = static_cast<uint32_t>(path.mixer_count());
        return out;
    }

    // Strict: consume the reply route; the board learns only the first hop.
    ByteReader r(req.route);
    uint32_t first_hop = 0;
    if (!r.get_u32(first_hop) || r.remaining() == 0) return std::nullopt;
    Bytes route_ct;
    r.get_vector(route_ct, r.remaining());

    RoutedResponse out;
    out.packet.next_hop = first_hop;
    out.packet.body.push_back(kReplyFrame);
    put_u32(out.packet.body, static_cast<uint32_t>(route_ct.size()));
    put_bytes(out.packet.body, route_ct);
    put_bytes(out.packet.body, resp.serialize());
    return out;
}

MixerBuffer::Ingest MixerBuffer::ingest(const crypto::MixKeyPair& kp, const OnionPacket& pkt,
                                        double now, uint64_t tag) {
    if (pkt.next_hop != kp.owner) return Ingest::WrongAddress;
    // A reply frame is recognisable by its prefix; anything else must be a
    // layer sealed to this relay. A sealed layer whose random first byte
    // happens to read 0x04 falls through: its route part cannot decrypt.
    if (!pkt.body.empty() && pkt.body[0] == kReplyFrame) {
        if (auto peeled = peel_reply(kp, pkt.body)) {
            pending_.push_back({std::move(*peeled), now, tag});
            return Ingest::Buffered;
        }
    }
    if (auto peeled = onion_peel(kp, pkt.body)) {
        pending_.push_back({std::move(*peeled), now, tag});
        return Ingest::Buffered;
    }
    peel_failures_ += 1;
    return Ingest::PeelFailure;
}

std::vector<MixerBuffer::Emitted> MixerBuffer::flush(Rng& rng, const std::set<uint32_t>& reachable,
                                                     size_t batch_threshold) {
    if (pending_.empty() || pending_.size() < batch_threshold) return {};
    for (size_t i = pending_.size() - 1; i > 0; --i) {
        const uint32_t j = next_below(rng, static_cast<uint32_t>(i + 1));
        std::swap(pending_[i], pending_[j]);
    }
    std::vector<Emitted> emitted;
    std::vector<Entry> kept;
    for (Entry& e : pending_) {
        if (reachable.count(e.pkt.next_hop)) {
            emitted.push_back({std::move(e.pkt), e.tag});
        } else {
            kept.push_back(std::move(e));
        }
    }
    pending_ = std::move(kept);
    return emitted;
}

}  // namespace dropnet
