#include <doctest.h>

#include <set>

#include "dropnet/crypto.hpp"

using namespace dropnet;
using namespace dropnet::crypto;

namespace {

Bytes make_payload(Rng& rng, size_t n) {
    Bytes b(n);
    if (n > 0) fill_bytes(rng, b.data(), n);
    return b;
}

}  // namespace

TEST_CASE("commit is deterministic and verify accepts the matching pair") {
    Rng rng = seeded_rng(100);
    for (int i = 0; i < 100; ++i) {
        TagPreimage p = TagPreimage::random(rng);
        TagCommitment t1 = commit(p);
        TagCommitment t2 = commit(p);
        CHECK(t1 == t2);
        CHECK(verify(p, t1));
    }
}

TEST_CASE("commitments are collision-free over many preimages") {
    Rng rng = seeded_rng(101);
    std::set<std::array<uint8_t, 32>> images;
    for (int i = 0; i < 100000; ++i) {
        TagPreimage p = TagPreimage::random(rng);
        images.insert(commit(p).bytes);
    }
    CHECK(images.size() == 100000);
}

TEST_CASE("verify rejects wrong preimages") {
    Rng rng = seeded_rng(102);
    TagPreimage p = TagPreimage::random(rng);
    TagCommitment t = commit(p);
    for (int i = 0; i < 10000; ++i) {
        TagPreimage other = TagPreimage::random(rng);
        CHECK_FALSE(verify(other, t));
    }
    // A single flipped bit in the preimage must fail too.
    TagPreimage flipped = p;
    flipped.bytes[0] ^= 0x01;
    CHECK_FALSE(verify(flipped, t));

    // All-zero commitment accepts nothing we can produce.
    TagCommitment zero;
    CHECK_FALSE(verify(p, zero));
}

TEST_CASE("kdf ratchet moves and never cycles over a chain") {
    Rng rng = seeded_rng(103);
    SymmetricKey k = SymmetricKey::random(rng);
    CHECK(kdf(k) == kdf(k));
    CHECK_FALSE(kdf(k) == k);

    std::set<std::array<uint8_t, 32>> chain;
    SymmetricKey cur = k;
    for (int i = 0; i < 50; ++i) {
        chain.insert(cur.bytes);
        cur = kdf(cur);
    }
    chain.insert(cur.bytes);
    CHECK(chain.size() == 51);
}

TEST_CASE("two endpoints ratcheting from the same key stay equal") {
    Rng rng = seeded_rng(104);
    SymmetricKey a = SymmetricKey::random(rng);
    SymmetricKey b = a;
    for (int i = 0; i < 50; ++i) {
        a = kdf(a);
        b = kdf(b);
        CHECK(a == b);
    }
}

TEST_CASE("symmetric roundtrip over random keys and payloads") {
    Rng rng = seeded_rng(105);
    for (int i = 0; i < 1000; ++i) {
        SymmetricKey k = SymmetricKey::random(rng);
        Bytes pt = make_payload(rng, next_below(rng, 300));
        Bytes ct = sym_encrypt(k, pt);
        CHECK(ct.size() == pt.size() + kSymOverhead);
        auto back = sym_decrypt(k, ct);
        REQUIRE(back.has_value());
        CHECK(*back == pt);
    }
}

TEST_CASE("symmetric encryption is deterministic per (key, plaintext)") {
    Rng rng = seeded_rng(106);
    SymmetricKey k = SymmetricKey::random(rng);
    Bytes pt = make_payload(rng, 64);
    CHECK(sym_encrypt(k, pt) == sym_encrypt(k, pt));
    Bytes other = pt;
    other[0] ^= 0xff;
    CHECK_FALSE(sym_encrypt(k, pt) == sym_encrypt(k, other));
}

TEST_CASE("decryption under any wrong key fails, never returns garbage") {
    Rng rng = seeded_rng(107);
    SymmetricKey k = SymmetricKey::random(rng);
    Bytes pt = make_payload(rng, 48);
    Bytes ct = sym_encrypt(k, pt);

    CHECK_FALSE(sym_decrypt(kdf(k), ct).has_value());
    for (int i = 0; i < 1000; ++i) {
        SymmetricKey wrong = SymmetricKey::random(rng);
        CHECK_FALSE(sym_decrypt(wrong, ct).has_value());
    }
}

TEST_CASE("tampered or truncated ciphertext fails authentication") {
    Rng rng = seeded_rng(108);
    SymmetricKey k = SymmetricKey::random(rng);
    Bytes ct = sym_encrypt(k, make_payload(rng, 32));

    for (size_t pos : {size_t{0}, ct.size() / 2, ct.size() - 1}) {
        Bytes bad = ct;
        bad[pos] ^= 0x01;
        CHECK_FALSE(sym_decrypt(k, bad).has_value());
    }
    Bytes shorter(ct.begin(), ct.end() - 1);
    CHECK_FALSE(sym_decrypt(k, shorter).has_value());
    CHECK_FALSE(sym_decrypt(k, Bytes{}).has_value());
    CHECK_FALSE(sym_decrypt(k, Bytes(kSymOverhead - 1, 0)).has_value());
}

TEST_CASE("layer roundtrip and size accounting") {
    Rng rng = seeded_rng(109);
    MixKeyPair kp = MixKeyPair::generate(5, rng);
    CHECK(kp.owner == 5);
    Bytes inner = make_payload(rng, 200);
    Bytes layer = layer_encrypt(kp.public_key, inner, rng);
    CHECK(layer.size() == inner.size() + kLayerOverhead);
    auto back = layer_decrypt(kp, layer);
    REQUIRE(back.has_value());
    CHECK(*back == inner);
}

TEST_CASE("layer decryption needs the matching secret key") {
    Rng rng = seeded_rng(110);
    MixKeyPair kp = MixKeyPair::generate(1, rng);
    MixKeyPair other = MixKeyPair::generate(2, rng);
    Bytes layer = layer_encrypt(kp.public_key, make_payload(rng, 40), rng);

    CHECK_FALSE(layer_decrypt(other, layer).has_value());
    Bytes bad = layer;
    bad[bad.size() - 1] ^= 0x01;
    CHECK_FALSE(layer_decrypt(kp, bad).has_value());
    CHECK_FALSE(layer_decrypt(kp, Bytes(kLayerOverhead - 1, 0)).has_value());
}

TEST_CASE("nested layers peel only in order") {
    Rng rng = seeded_rng(111);
    MixKeyPair a = MixKeyPair::generate(1, rng);
    MixKeyPair b = MixKeyPair::generate(2, rng);
    MixKeyPair c = MixKeyPair::generate(3, rng);
    Bytes inner = make_payload(rng, 25);

    Bytes l3 = layer_encrypt(c.public_key, inner, rng);
    Bytes l2 = layer_encrypt(b.public_key, l3, rng);
    Bytes l1 = layer_encrypt(a.public_key, l2, rng);

    // Out of order: the middle or inner key cannot open the outer layer.
    CHECK_FALSE(layer_decrypt(b, l1).has_value());
    CHECK_FALSE(layer_decrypt(c, l1).has_value());

    auto p1 = layer_decrypt(a, l1);
    REQUIRE(p1.has_value());
    CHECK(*p1 == l2);
    CHECK_FALSE(layer_decrypt(a, *p1).has_value());  // a again: already peeled

    auto p2 = layer_decrypt(b, *p1);
    REQUIRE(p2.has_value());
    auto p3 = layer_decrypt(c, *p2);
    REQUIRE(p3.has_value());
    CHECK(*p3 == inner);
}

TEST_CASE("key pairs are deterministic per rng state and distinct across draws") {
    Rng a = seeded_rng(112);
    Rng b = seeded_rng(112);
    MixKeyPair kp1 = MixKeyPair::generate(9, a);
    MixKeyPair kp2 = MixKeyPair::generate(9, b);
    CHECK(kp1.public_key == kp2.public_key);
    CHECK(kp1.secret_key == kp2.secret_key);

    MixKeyPair kp3 = MixKeyPair::generate(9, a);
    CHECK_FALSE(kp3.public_key == kp1.public_key);
}
