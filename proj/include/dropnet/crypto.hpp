#pragma once

// Primitives used by the dead-drop protocol: tag commitments, an
// authenticated symmetric cipher, the key ratchet, and per-relay public-key
// layer encryption. Everything is deterministic given its inputs; randomness
// (key material, ephemerals) always comes from a caller-supplied Rng, so
// simulation runs replay exactly.
//
// Backed by libsodium: BLAKE2b for hashing/derivation, XChaCha20-Poly1305
// for authenticated encryption, X25519 for relay key pairs. Nonces are
// derived, not sampled, to keep ciphertexts a pure function of the inputs.

#include <array>
#include <cstdint>
#include <optional>

#include "dropnet/bytes.hpp"
#include "dropnet/rng.hpp"

namespace dropnet::crypto {

constexpr size_t kTokenLen = 32;  // preimages, commitments, symmetric keys

/// Secret token whose hash image is stored on the board as a cell tag.
struct TagPreimage {
    std::array<uint8_t, kTokenLen> bytes{};

    static TagPreimage random(Rng& rng) { return TagPreimage{random_array<kTokenLen>(rng)}; }
    bool operator==(const TagPreimage&) const = default;
};

/// Hash image of a preimage; safe to store publicly.
struct TagCommitment {
    std::array<uint8_t, kTokenLen> bytes{};
    bool operator==(const TagCommitment&) const = default;
};

struct SymmetricKey {
    std::array<uint8_t, kTokenLen> bytes{};

    static SymmetricKey random(Rng& rng) { return SymmetricKey{random_array<kTokenLen>(rng)}; }
    bool operator==(const SymmetricKey&) const = default;
};

/// X25519 key pair held by a relay node.
struct MixKeyPair {
    uint32_t owner = 0;
    std::array<uint8_t, 32> public_key{};
    std::array<uint8_t, 32> secret_key{};

    static MixKeyPair generate(uint32_t owner, Rng& rng);
};

TagCommitment commit(const TagPreimage& p);
bool verify(const TagPreimage& p, const TagCommitment& t);

/// One ratchet step. Pure; both endpoints advancing from equal keys stay equal.
SymmetricKey kdf(const SymmetricKey& k);

/// Authenticated encryption. Output embeds the (derived) nonce; decryption
/// under any other key fails with nullopt, never returns garbage.
Bytes sym_encrypt(const SymmetricKey& k, BytesView plaintext);
std::optional<Bytes> sym_decrypt(const SymmetricKey& k, BytesView ciphertext);

/// Seal one onion layer to a relay's public key. The ephemeral comes from
/// rng. Peeling with the matching secret key recovers the inner bytes; any
/// other key fails detectably.
Bytes layer_encrypt(const std::array<uint8_t, 32>& public_key, BytesView inner, Rng& rng);
std::optional<Bytes> layer_decrypt(const MixKeyPair& kp, BytesView layer);

/// Minimum ciphertext growth of one layer_encrypt (ephemeral + MAC).
constexpr size_t kLayerOverhead = 32 + 16;
constexpr size_t kSymOverhead = 24 + 16;  // nonce + MAC

}  // namespace dropnet::crypto
