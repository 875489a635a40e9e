#pragma once

// The central bulletin board: a fixed array of cells, each either empty or
// holding a (tag commitment, opaque value) pair. Writers name a cell index
// and prove nothing; readers present a preimage whose hash must match the
// stored tag. A failed read and a read of an empty cell both yield Null, so
// the board cannot tell probing from polling. Successful reads delete.
//
// Flooding control is a per-token credit count. Tokens are capabilities
// handed out at registration; they name no identity.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dropnet/bytes.hpp"
#include "dropnet/crypto.hpp"
#include "dropnet/rng.hpp"

namespace dropnet {

constexpr size_t kCreditTokenLen = 16;
using CreditToken = std::array<uint8_t, kCreditTokenLen>;

// Request/response wire formats. All integers big-endian.
constexpr uint8_t kKindWrite = 0x01;
constexpr uint8_t kKindRead = 0x02;
constexpr uint8_t kKindResponse = 0x03;

struct WriteRequest {
    uint32_t index = 0;
    crypto::TagCommitment tag;
    CreditToken token{};
    Bytes value;

    Bytes serialize() const;
    static std::optional<WriteRequest> parse(BytesView wire);
};

struct ReadRequest {
    uint32_t index = 0;
    crypto::TagPreimage preimage;
    Bytes route;  // opaque reply-route blob; empty when unused

    Bytes serialize() const;
    static std::optional<ReadRequest> parse(BytesView wire);
};

struct Response {
    bool has_value = false;  // false encodes Null
    Bytes value;

    Bytes serialize() const;
    static std::optional<Response> parse(BytesView wire);
};

enum class WriteStatus : uint8_t {
    Ok,
    ErrOutOfRange,
    ErrOccupied,
    ErrNoCredit,
};

/// Outcome of a read. Null carries no reason: out-of-range, empty cell and
/// wrong preimage are one indistinguishable case by design.
struct ReadResult {
    std::optional<Bytes> value;

    bool is_null() const { return !value.has_value(); }
};

class Board {
public:
    explicit Board(size_t cells, uint32_t default_credits = 100);

    size_t size() const { return cells_.size(); }
    size_t occupancy() const { return occupied_; }

    /// Register a caller-chosen token with an explicit credit count.
    /// Returns false (board unchanged) if the token already exists.
    bool register_token(const CreditToken& token, uint32_t credits);

    /// Hand out a fresh random token with the default credit count. Fails
    /// (returns nullopt) only on the astronomically unlikely collision.
    std::optional<CreditToken> register_client(Rng& rng);
    std::optional<uint32_t> remaining(const CreditToken& token) const;

    WriteStatus apply_write(const WriteRequest& req);
    ReadResult apply_read(const ReadRequest& req);

    /// Digest of the full board state (cells and credit table). Two boards
    /// with equal fingerprints hold identical state; used to check that
    /// failed operations leave no trace.
    std::array<uint8_t, 32> fingerprint() const;

private:
    struct Cell {
        bool occupied = false;
        crypto::TagCommitment tag;
        Bytes value;
    };

    std::vector<Cell> cells_;
    std::map<CreditToken, uint32_t> credits_;
    uint32_t default_credits_;
    size_t occupied_ = 0;
};

}  // namespace dropnet
