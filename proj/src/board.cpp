#include "dropnet/board.hpp"

#include <sodium.h>

namespace dropnet {

// --- wire formats ---------------------------------------------------------

Bytes WriteRequest::serialize() const {
    Bytes out;
    out.reserve(1 + 4 + crypto::kTokenLen + kCreditTokenLen + 4 + value.size());
    out.push_back(kKindWrite);
    put_u32(out, index);
    put_bytes(out, BytesView(tag.bytes));
    put_bytes(out, BytesView(token));
    put_u32(out, static_cast<uint32_t>(value.size()));
    put_bytes(out, value);
    return out;
}

std::optional<WriteRequest> WriteRequest::parse(BytesView wire) {
    ByteReader r(wire);
    uint8_t kind = 0;
    if (!r.get_u8(kind) || kind != kKindWrite) return std::nullopt;
    WriteRequest req;
    if (!r.get_u32(req.index)) return std::nullopt;
    if (!r.get_bytes(req.tag.bytes.data(), req.tag.bytes.size())) return std::nullopt;
    if (!r.get_bytes(req.token.data(), req.token.size())) return std::nullopt;
    uint32_t len = 0;
    if (!r.get_u32(len) || !r.get_vector(req.value, len)) return std::nullopt;
    if (!r.done()) return std::nullopt;
    return req;
}

Bytes ReadRequest::serialize() const {
    Bytes out;
    out.reserve(1 + 4 + crypto::kTokenLen + 2 + route.size());
    out.push_back(kKindRead);
    put_u32(out, index);
    put_bytes(out, BytesView(preimage.bytes));
    put_u16(out, static_cast<uint16_t>(route.size()));
    put_bytes(out, route);
    return out;
}

std::optional<ReadRequest> ReadRequest::parse(BytesView wire) {
    ByteReader r(wire);
    uint8_t kind = 0;
    if (!r.get_u8(kind) || kind != kKindRead) return std::nullopt;
    ReadRequest req;
    if (!r.get_u32(req.index)) return std::nullopt;
    if (!r.get_bytes(req.preimage.bytes.data(), req.preimage.bytes.size())) return std::nullopt;
    uint16_t route_len = 0;
    if (!r.get_u16(route_len) || !r.get_vector(req.route, route_len)) return std::nullopt;
    if (!r.done()) return std::nullopt;
    return req;
}

Bytes Response::serialize() const {
    Bytes out;
    out.reserve(1 + 1 + 4 + value.size());
    out.push_back(kKindResponse);
    out.push_back(has_value ? 1 : 0);
    put_u32(out, static_cast<uint32_t>(value.size()));
    put_bytes(out, value);
    return out;
}

std::optional<Response> Response::parse(BytesView wire) {
    ByteReader r(wire);
    uint8_t kind = 0, status = 0;
    if (!r.get_u8(kind) || kind != kKindResponse) return std::nullopt;
    if (!r.get_u8(status) || status > 1) return std::nullopt;
    Response resp;
    resp.has_value = status == 1;
    uint32_t len = 0;
    if (!r.get_u32(len) || !r.get_vector(resp.value, len)) return std::nullopt;
    if (!r.done()) return std::nullopt;
    if (!resp.has_value && !resp.value.empty()) return std::nullopt;
    return resp;
}

// --- board ----------------------------------------------------------------

Board::Board(size_t cells, uint32_t default_credits)
    : cells_(cells), default_credits_(default_credits) {}

bool Board::register_token(const CreditToken& token, uint32_t credits) {
    return credits_.emplace(token, credits).second;
}

std::optional<CreditToken> Board::register_client(Rng& rng) {
    CreditToken token;
    fill_bytes(rng, token.data(), token.size());
    if (!register_token(token, default_credits_)) return std::nullopt;
    return token;
}

std::optional<uint32_t> Board::remaining(const CreditToken& token) const {
    auto it = credits_.find(token);
    if (it == credits_.end()) return std::nullopt;
    return it->second;
}

WriteStatus Board::apply_write(const WriteRequest& req) {
    if (req.index >= cells_.size()) return WriteStatus::ErrOutOfRange;
    if (cells_[req.index].occupied) return WriteStatus::ErrOccupied;
    auto it = credits_.find(req.token);
    if (it == credits_.end() || it->second == 0) return WriteStatus::ErrNoCredit;
    it->second -= 1;
    Cell& cell = cells_[req.index];
    cell.occupied = true;
    cell.tag = req.tag;
    cell.value = req.value;
    occupied_ += 1;
    return WriteStatus::Ok;
}

ReadResult Board::apply_read(const ReadRequest& req) {
    if (req.index >= cells_.size()) return {};
    Cell& cell = cells_[req.index];
    if (!cell.occupied) return {};
    if (!crypto::verify(req.preimage, cell.tag)) return {};
    ReadResult result;
    result.value = std::move(cell.value);
    cell = Cell{};  // delete on successful read
    occupied_ -= 1;
    return result;
}

std::array<uint8_t, 32> Board::fingerprint() const {
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, 32);
    Bytes scratch;
    for (const Cell& cell : cells_) {
        scratch.clear();
        scratch.push_back(cell.occupied ? 1 : 0);
        if (cell.occupied) {
            put_bytes(scratch, BytesView(cell.tag.bytes));
            put_u32(scratch, static_cast<uint32_t>(cell.value.size()));
            put_bytes(scratch, cell.value);
        }
        crypto_generichash_update(&st, scratch.data(), scratch.size());
    }
    for (const auto& [token, credits] : credits_) {
        scratch.clear();
        put_bytes(scratch, BytesView(token));
        put_u32(scratch, credits);
        crypto_generichash_update(&st, scratch.data(), scratch.size());
    }
    std::array<uint8_t, 32> digest;
    crypto_generichash_final(&st, digest.data(), digest.size());
    return digest;
}

}  // namespace dropnet
