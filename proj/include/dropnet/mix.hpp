#pragma once

// Mix overlay: onion paths of 0 to 3 mixer relays between clients and the
// board, plus the buffered shuffle each mixer applies before forwarding.
// Layer header, sealed per hop (big-endian): [4-byte next-hop id][4-byte
// body length][body]. Peeling in hop order strips one header per relay;
// the innermost bytes are the board request or response.
//
// Responses travel either over a board-chosen path to the reader (paper
// mode) or over reply-route material the reader pre-built so the board
// never learns who is asking (strict mode). A strict reply on the wire is
// a reply frame: [1-byte 0x04][4-byte route length][route ciphertext]
// [response bytes]; each relay peels only the route part, the response
// bytes ride along opaquely. Relays are not hidden from a global observer
// (no per-hop payload re-encryption); strict mode only blinds the board.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "dropnet/board.hpp"
#include "dropnet/bytes.hpp"
#include "dropnet/crypto.hpp"
#include "dropnet/rng.hpp"

namespace dropnet {

using MixKeyring = std::map<uint32_t, std::array<uint8_t, 32>>;

constexpr uint8_t kReplyFrame = 0x04;
constexpr uint32_t kMaxMixers = 3;

struct MixPath {
    std::vector<uint32_t> hops;  // 0-3 distinct mixers, then the terminal

    size_t mixer_count() const { return hops.size() - 1; }
    uint32_t terminal() const { return hops.back(); }
    uint32_t first_hop() const { return hops.front(); }
};

/// Mixer count drawn uniformly from {min_mixers..max_mixers} (both clamped
/// to the pool size), then that many distinct mixers sampled without
/// replacement. The default draw is the protocol's uniform {0..3}; a nonzero
/// minimum serves strict-mode requests that must not reach the terminal
/// directly.
MixPath build_path(Rng& rng, const std::vector<uint32_t>& mixer_pool, uint32_t terminal,
                   uint32_t max_mixers = kMaxMixers, uint32_t min_mixers = 0);

struct OnionPacket {
    uint32_t next_hop = 0;
    Bytes body;
};

/// Seal inner for the given path. With zero mixers the body is the bare
/// inner bytes addressed to the terminal. Throws std::invalid_argument if a
/// path mixer is missing from the keyring.
OnionPacket onion_wrap(const MixPath& path, BytesView inner, const MixKeyring& keyring,
                       Rng& rng);

/// Strip one layer with this relay's key. Fails (nullopt) for any packet not
/// sealed to this key, including out-of-order peel attempts.
std::optional<OnionPacket> onion_peel(const crypto::MixKeyPair& kp, BytesView body);

/// Relay step for a strict-mode reply frame: peel the route part, keep the
/// response bytes attached. The final relay's output is the bare response
/// addressed to the reader.
std::optional<OnionPacket> peel_reply(const crypto::MixKeyPair& kp, BytesView body);

struct ReplyRoute {
    Bytes wire;          // [4-byte first hop][layered route ciphertext]
    uint32_t mixers = 0;
};

/// Reader-side construction of strict reply material. Uses 1 to max_mixers
/// mixers; zero would name the reader in cleartext to the board.
ReplyRoute build_reply_route(Rng& rng, const std::vector<uint32_t>& mixer_pool,
                             const MixKeyring& keyring, uint32_t reader_id,
                             uint32_t max_mixers = kMaxMixers);

enum class ResponseMode : uint8_t { Paper, Strict };

struct RoutedResponse {
    OnionPacket packet;
    // Mixer count of the drawn path in paper mode. Strict mode reports 0
    // here: only the reader knows its route's length, the caller tracks it.
    uint32_t mixers = 0;
};

/// Board-side response dispatch. Paper mode builds a fresh 0-3 mixer path to
/// reader_id (known to the simulator, not taken from the request). Strict
/// mode consumes the request's reply route and ignores reader_id; a missing
/// or malformed route yields nullopt and the response is dropped.
std::optional<RoutedResponse> route_response(ResponseMode mode, const ReadRequest& req,
                                             uint32_t reader_id, const Response& resp, Rng& rng,
                                             const std::vector<uint32_t>& mixer_pool,
                                             const MixKeyring& keyring,
                                             uint32_t max_mixers = kMaxMixers);

/// Store-carry buffer of one mixer. Packets are peeled on ingest and leave
/// in shuffled order whenever their next hop is reachable. The tag is an
/// opaque caller value (the simulator keys its bookkeeping on it) that rides
/// along unchanged; it is not part of any wire format.
class MixerBuffer {
public:
    enum class Ingest : uint8_t { Buffered, WrongAddress, PeelFailure };

    struct Emitted {
        OnionPacket pkt;
        uint64_t tag = 0;
    };

    Ingest ingest(const crypto::MixKeyPair& kp, const OnionPacket& pkt, double now,
                  uint64_t tag = 0);

    /// Shuffle the buffer, emit (and remove) every packet whose next hop is
    /// reachable, keep the rest. A nonzero batch threshold suppresses any
    /// emission until that many packets are pending.
    std::vector<Emitted> flush(Rng& rng, const std::set<uint32_t>& reachable,
                               size_t batch_threshold = 0);

    size_t pending() const { return pending_.size(); }
    uint64_t peel_failures() const { return peel_failures_; }

private:
    struct Entry {
        OnionPacket pkt;
        double arrival = 0.0;
        uint64_t tag = 0;
    };
    std::vector<Entry> pending_;
    uint64_t peel_failures_ = 0;
};

}  // namespace dropnet
