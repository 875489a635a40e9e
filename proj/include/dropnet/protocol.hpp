#pragma once

// Client side of the dead-drop exchange. A session is one direction of a
// conversation: the writer deposits chained messages on the board, the
// reader collects them. Each envelope carries the pointer (index, preimage)
// for the following message, and both ends ratchet the symmetric key per
// message, so observing the board links nothing across messages.

#include <cstdint>
#include <optional>
#include <utility>

#include "dropnet/board.hpp"
#include "dropnet/bytes.hpp"
#include "dropnet/crypto.hpp"
#include "dropnet/rng.hpp"

namespace dropnet {

enum class Role : uint8_t { Writer, Reader };

struct SessionState {
    uint32_t peer = 0;
    crypto::SymmetricKey key;
    uint32_t next_index = 0;
    crypto::TagPreimage next_preimage;
    Role role = Role::Writer;
    uint32_t board_size = 0;
};

/// Plaintext sealed inside every cell value:
/// [4-byte payload length][payload][4-byte next_index][32-byte next_preimage]
struct PlainEnvelope {
    Bytes payload;
    uint32_t next_index = 0;
    crypto::TagPreimage next_preimage;

    Bytes serialize() const;
    static std::optional<PlainEnvelope> parse(BytesView wire);
};

/// Models the in-person key agreement: both parties leave with identical
/// key material and the location of the first message.
std::pair<SessionState, SessionState> establish_session(uint32_t a, uint32_t b, uint32_t board_size,
                                                        Rng& rng);

struct WriteOutcome {
    WriteRequest request;
    SessionState next;
};

/// Build the write for the current chain position and advance the state.
/// The ratchet advances at send time; the protocol carries no acks. Draw
/// order from rng: next index, then next preimage.
WriteOutcome prepare_write(const SessionState& state, BytesView payload, Rng& rng,
                           const CreditToken& token);

/// Re-emit after ErrOccupied: same payload and tag, current index redrawn
/// uniformly, fresh chain pointer, still sealed under the pre-ratchet key.
/// Draw order: current index, next index, next preimage. The reader learns
/// the new location out of band, so this only suits synchronous use.
WriteOutcome retry_write(const SessionState& state_before, BytesView payload, Rng& rng,
                         const CreditToken& token);

/// Polling is idempotent: no state change until a Value comes back.
ReadRequest prepare_read(const SessionState& state);

enum class HandleStatus : uint8_t {
    Delivered,  // payload decrypted, state advanced
    Empty,      // Null response, poll again later
    Desync,     // Value present but authentication failed: states diverged
};

struct HandleOutcome {
    HandleStatus status = HandleStatus::Empty;
    Bytes payload;
    SessionState next;
};

HandleOutcome handle_response(const SessionState& state, const Response& resp);

/// Synchronous driver: submit to a live board, retrying occupied cells.
/// Gives up (ok = false, state unchanged) after board-size consecutive
/// occupied rejections; any other rejection also fails immediately.
struct SyncWriteResult {
    bool ok = false;
    WriteStatus last_status = WriteStatus::Ok;
    uint32_t index = 0;      // cell that accepted the write
    uint32_t rejections = 0;
    SessionState next;
};

SyncWriteResult write_with_retry(const SessionState& state, BytesView payload, Rng& rng,
                                 const CreditToken& token, Board& board);

}  // namespace dropnet
