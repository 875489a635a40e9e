#include "dropnet/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace dropnet::crypto {
namespace {

// Domain-separation keys for BLAKE2b. Distinct contexts can never produce
// related digests even on identical input bytes.
constexpr char kCommitDomain[16] = {'d', 'r', 'o', 'p', 'n', 'e', 't', '.',
                                    'c', 'o', 'm', 'm', 'i', 't', '0', '1'};
constexpr char kKdfDomain[16] = {'d', 'r', 'o', 'p', 'n', 'e', 't', '.',
                                 'r', 'a', 't', 'c', 'h', 'e', 't', '1'};
constexpr char kNonceDomain[16] = {'d', 'r', 'o', 'p', 'n', 'e', 't', '.',
                                   'n', 'o', 'n', 'c', 'e', '0', '0', '1'};
constexpr char kLayerDomain[16] = {'d', 'r', 'o', 'p', 'n', 'e', 't', '.',
                                   'l', 'a', 'y', 'e', 'r', '0', '0', '1'};

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium failed to initialise");
}

void blake2b(uint8_t* out, size_t out_len, BytesView in, const char (&domain)[16]) {
    crypto_generichash(out, out_len, in.data(), in.size(),
                       reinterpret_cast<const unsigned char*>(domain), sizeof domain);
}

}  // namespace

MixKeyPair MixKeyPair::generate(uint32_t owner, Rng& rng) {
    ensure_sodium();
    MixKeyPair kp;
    kp.owner = owner;
    fill_bytes(rng, kp.secret_key.data(), kp.secret_key.size());
    crypto_scalarmult_base(kp.public_key.data(), kp.secret_key.data());
    return kp;
}

TagCommitment commit(const TagPreimage& p) {
    ensure_sodium();
    TagCommitment t;
    blake2b(t.bytes.data(), t.bytes.size(), BytesView(p.bytes), kCommitDomain);
    return t;
}

bool verify(const TagPreimage& p, const TagCommitment& t) {
    TagCommitment expect = commit(p);
    return sodium_memcmp(expect.bytes.data(), t.bytes.data(), kTokenLen) == 0;
}

SymmetricKey kdf(const SymmetricKey& k) {
    ensure_sodium();
    SymmetricKey next;
    blake2b(next.bytes.data(), next.bytes.size(), BytesView(k.bytes), kKdfDomain);
    return next;
}

Bytes sym_encrypt(const SymmetricKey& k, BytesView plaintext) {
    ensure_sodium();
    // Derive the nonce from key and plaintext. The protocol never encrypts
    // the same plaintext twice under one key (payloads embed fresh random
    // pointers), so this cannot repeat a (key, nonce) pair in practice, and
    // it keeps the ciphertext deterministic for replay.
    uint8_t nonce[crypto_aead_xchacha20poly1305_ietf_NPUBBYTES];
    crypto_generichash_state st;
    crypto_generichash_init(&st, reinterpret_cast<const unsigned char*>(kNonceDomain),
                            sizeof kNonceDomain, sizeof nonce);
    crypto_generichash_update(&st, k.bytes.data(), k.bytes.size());
    crypto_generichash_update(&st, plaintext.data(), plaintext.size());
    crypto_generichash_final(&st, nonce, sizeof nonce);

    Bytes out(sizeof nonce + plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    std::memcpy(out.data(), nonce, sizeof nonce);
    unsigned long long clen = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + sizeof nonce, &clen,
                                               plaintext.data(), plaintext.size(), nullptr, 0,
                                               nullptr, nonce, k.bytes.data());
    out.resize(sizeof nonce + clen);
    return out;
}

std::optional<Bytes> sym_decrypt(const SymmetricKey& k, BytesView ciphertext) {
    ensure_sodium();
    if (ciphertext.size() < kSymOverhead) return std::nullopt;
    const uint8_t* nonce = ciphertext.data();
    const uint8_t* ct = ciphertext.data() + crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
    const size_t ct_len = ciphertext.size() - crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
    Bytes plain(ct_len - crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long plen = 0;
    if (crypto_aead_xchacha20poly1305_ietf_decrypt(plain.data(), &plen, nullptr, ct, ct_len,
                                                   nullptr, 0, nonce, k.bytes.data()) != 0) {
        return std::nullopt;
    }
    plain.resize(plen);
    return plain;
}

Bytes layer_encrypt(const std::array<uint8_t, 32>& public_key, BytesView inner, Rng& rng) {
    ensure_sodium();
    std::array<uint8_t, 32> esk = random_array<32>(rng);
    std::array<uint8_t, 32> epk;
    crypto_scalarmult_base(epk.data(), esk.data());

    std::array<uint8_t, 32> shared;
    if (crypto_scalarmult(shared.data(), esk.data(), public_key.data()) != 0) {
        throw std::runtime_error("x25519 failed on relay public key");
    }

    // Session key binds the shared secret to both public keys.
    uint8_t key[32];
    uint8_t nonce[crypto_aead_xchacha20poly1305_ietf_NPUBBYTES];
    crypto_generichash_state st;
    crypto_generichash_init(&st, reinterpret_cast<const unsigned char*>(kLayerDomain),
                            sizeof kLayerDomain, sizeof key);
    crypto_generichash_update(&st, shared.data(), shared.size());
    crypto_generichash_update(&st, epk.data(), epk.size());
    crypto_generichash_update(&st, public_key.data(), public_key.size());
    crypto_generichash_final(&st, key, sizeof key);
    crypto_generichash(nonce, sizeof nonce, epk.data(), epk.size(),
                       public_key.data(), public_key.size());

    Bytes out(32 + inner.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    std::memcpy(out.data(), epk.data(), 32);
    unsigned long long clen = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + 32, &clen, inner.data(),
                                               inner.size(), nullptr, 0, nullptr, nonce, key);
    out.resize(32 + clen);
    return out;
}

std::optional<Bytes> layer_decrypt(const MixKeyPair& kp, BytesView layer) {
    ensure_sodium();
    if (layer.size() < kLayerOverhead) return std::nullopt;
    std::array<uint8_t, 32> epk;
    std::memcpy(epk.data(), layer.data(), 32);

    std::array<uint8_t, 32> shared;
    if (crypto_scalarmult(shared.data(), kp.secret_key.data(), epk.data()) != 0) {
        return std::nullopt;
    }

    uint8_t key[32];
    uint8_t nonce[crypto_aead_xchacha20poly1305_ietf_NPUBBYTES];
    crypto_generichash_state st;
    crypto_generichash_init(&st, reinterpret_cast<const unsigned char*>(kLayerDomain),
                            sizeof kLayerDomain, sizeof key);
    crypto_generichash_update(&st, shared.data(), shared.size());
    crypto_generichash_update(&st, epk.data(), epk.size());
    crypto_generichash_update(&st, kp.public_key.data(), kp.public_key.size());
    crypto_generichash_final(&st, key, sizeof key);
    crypto_generichash(nonce, sizeof nonce, epk.data(), epk.size(),
                       kp.public_key.data(), kp.public_key.size());

    const uint8_t* ct = layer.data() + 32;
    const size_t ct_len = layer.size() - 32;
    Bytes inner(ct_len - crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long plen = 0;
    if (crypto_aead_xchacha20poly1305_ietf_decrypt(inner.data(), &plen, nullptr, ct, ct_len,
                                                   nullptr, 0, nonce, key) != 0) {
        return std::nullopt;
    }
    inner.resize(plen);
    return inner;
}

}  // namespace dropnet::crypto
