#include "dropnet/protocol.hpp"

namespace dropnet {

Bytes PlainEnvelope::serialize() const {
    Bytes out;
    out.reserve(4 + payload.size() + 4 + crypto::kTokenLen);
    put_u32(out, static_cast<uint32_t>(payload.size()));
    put_bytes(out, payload);
    put_u32(out, next_index);
    put_bytes(out, BytesView(next_preimage.bytes));
    return out;
}

std::optional<PlainEnvelope> PlainEnvelope::parse(BytesView wire) {
    ByteReader r(wire);
    PlainEnvelope env;
    uint32_t len = 0;
    if (!r.get_u32(len) || !r.get_vector(env.payload, len)) return std::nullopt;
    if (!r.get_u32(env.next_index)) return std::nullopt;
    if (!r.get_bytes(env.next_preimage.bytes.data(), env.next_preimage.bytes.size())) {
        return std::nullopt;
    }
    if (!r.done()) return std::nullopt;
    return env;
}

std::pair<SessionState, SessionState> establish_session(uint32_t a, uint32_t b,
                                                        uint32_t board_size, Rng& rng) {
    SessionState writer;
    writer.peer = b;
    writer.key = crypto::SymmetricKey::random(rng);
    writer.next_index = next_below(rng, board_size);
    writer.next_preimage = crypto::TagPreimage::random(rng);
    writer.role = Role::Writer;
    writer.board_size = board_size;

    SessionState reader = writer;
    reader.peer = a;
    reader.role = Role::Reader;
    return {writer, reader};
}

namespace {

// Shared tail of prepare_write and retry_write: seal the envelope with a
// fresh chain pointer under the pre-ratchet key, then advance the state.
WriteOutcome seal_write(const SessionState& state, BytesView payload, Rng& rng,
                        const CreditToken& token, uint32_t current_index) {
    const uint32_t next_index = next_below(rng, state.board_size);
    const crypto::TagPreimage next_preimage = crypto::TagPreimage::random(rng);

    PlainEnvelope env;
    env.payload.assign(payload.begin(), payload.end());
    env.next_index = next_index;
    env.next_preimage = next_preimage;

    WriteOutcome out;
    out.request.index = current_index;
    out.request.tag = crypto::commit(state.next_preimage);
    out.request.token = token;
    out.request.value = crypto::sym_encrypt(state.key, env.serialize());

    out.next = state;
    out.next.key = crypto::kdf(state.key);
    out.next.next_index = next_index;
    out.next.next_preimage = next_preimage;
    return out;
}

}  // namespace

WriteOutcome prepare_write(const SessionState& state, BytesView payload, Rng& rng,
                           const CreditToken& token) {
    return seal_write(state, payload, rng, token, state.next_index);
}

WriteOutcome retry_write(const SessionState& state_before, BytesView payload, Rng& rng,
                         const CreditToken& token) {
    const uint32_t fresh_index = next_below(rng, state_before.board_size);
    return seal_write(state_before, payload, rng, token, fresh_index);
}

ReadRequest prepare_read(const SessionState& state) {
    ReadRequest req;
    req.index = state.next_index;
    req.preimage = state.next_preimage;
    return req;
}

HandleOutcome handle_response(const SessionState& state, const Response& resp) {
    HandleOutcome out;
    out.next = state;
    if (!resp.has_value) {
        out.status = HandleStatus::Empty;
        return out;
    }
    auto plain = crypto::sym_decrypt(state.key, resp.value);
    if (!plain) {
        out.status = HandleStatus::Desync;
        return out;
    }
    auto env = PlainEnvelope::parse(*plain);
    if (!env) {
        out.status = HandleStatus::Desync;
        return out;
    }
    out.status = HandleStatus::Delivered;
    out.payload = std::move(env->payload);
    out.next.key = crypto::kdf(state.key);
    out.next.next_index = env->next_index;
    out.next.next_preimage = env->next_preimage;
    return out;
}

SyncWriteResult write_with_retry(const SessionState& state, BytesView payload, Rng& rng,
                                 const CreditToken& token, Board& board) {
    SyncWriteResult result;
    result.next = state;

    WriteOutcome attempt = prepare_write(state, payload, rng, token);
    while (true) {
        const WriteStatus status = board.apply_write(attempt.request);
        result.last_status = status;
        if (status == WriteStatus::Ok) {
            result.ok = true;
            result.index = attempt.request.index;
            result.next = attempt.next;
            return result;
        }
        if (status != WriteStatus::ErrOccupied) return result;
        result.rejections += 1;
        if (result.rejections >= state.board_size) return result;  // session error
        attempt = retry_write(state, payload, rng, token);
    }
}

}  // namespace dropnet
