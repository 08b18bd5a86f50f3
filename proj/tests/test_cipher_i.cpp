#include <doctest.h>

#include <array>
#include <bit>
#include <cstdint>

#include <suc/cipher_i.hpp>
#include <suc/errors.hpp>
#include <suc/sbox.hpp>
#include <suc/trng.hpp>

using namespace suc;

namespace {

const sbox::SBox4 kIdentityBox{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}};
const sbox::SBox4 kOptimalNonInvolution{
    {0xC, 5, 6, 0xB, 9, 0, 0xA, 0xD, 3, 0xE, 0xF, 8, 4, 7, 1, 2}};

ISucSpec::SBoxArray identity_layer() {
    ISucSpec::SBoxArray boxes;
    boxes.fill(kIdentityBox);
    return boxes;
}

Trng test_rng(uint64_t stream) {
    std::array<uint8_t, Trng::kSeedBytes> seed{};
    seed.fill(0x29);
    return Trng(seed, stream);
}

ISucSpec random_instance(Trng& rng) {
    ISucSpec::SBoxArray boxes;
    for (auto& b : boxes) b = sbox::sample_optimal(rng, true, false);
    ISucSpec::LutArray luts;
    for (auto& w : luts) w = uint16_t(rng.draw_bits(16));
    return ISucSpec::create(boxes, luts);
}

uint8_t nibble_xor(uint64_t x) {
    uint8_t f = 0;
    for (int i = 0; i < 16; ++i) f ^= uint8_t(x >> (4 * i) & 0xF);
    return f;
}

}  // namespace

TEST_CASE("diffusion: forced single-nibble pattern, involution, linearity") {
    CHECK(diffuse(0) == 0);
    CHECK(diffuse(0x5) == 0x5555555555555550ULL);
    // nibble 15 carries 0xA, so every other nibble becomes 0xA and nibble 15
    // itself cancels to 0
    CHECK(diffuse(uint64_t{0xA} << 60) == 0x0AAAAAAAAAAAAAAAULL);

    Trng rng = test_rng(1);
    for (int i = 0; i < 100000; ++i) {
        uint64_t x = rng.draw_bits(64);
        CHECK(diffuse(diffuse(x)) == x);
    }
    for (int i = 0; i < 10000; ++i) {
        uint64_t a = rng.draw_bits(64), b = rng.draw_bits(64);
        CHECK(diffuse(a ^ b) == (diffuse(a) ^ diffuse(b)));
    }
    // definition check on random words
    for (int i = 0; i < 1000; ++i) {
        uint64_t x = rng.draw_bits(64);
        uint64_t y = diffuse(x);
        uint8_t f = nibble_xor(x);
        for (int nib = 0; nib < 16; ++nib)
            CHECK(uint8_t(y >> (4 * nib) & 0xF) == (uint8_t(x >> (4 * nib) & 0xF) ^ f));
    }
}

TEST_CASE("key commutation holds exactly for fold-free keys") {
    Trng rng = test_rng(2);
    for (int i = 0; i < 10000; ++i) {
        uint64_t k = rng.draw_bits(60) << 4;
        k |= nibble_xor(k);  // close the fold: nibble 0 absorbs the XOR sum
        CHECK(check_commutation(k));
    }
    int tested = 0;
    while (tested < 1000) {
        uint64_t k = rng.draw_bits(64);
        if (nibble_xor(k) == 0) continue;
        ++tested;
        uint64_t x = 0;
        REQUIRE(!check_commutation(k, &x));
        CHECK(diffuse(x ^ k) != (diffuse(x) ^ k));
    }
}

TEST_CASE("one LUT bit: placement and derived nibble") {
    ISucSpec::LutArray luts{};
    luts[5] = 0x0002;  // bit 1 of LUT 5: bit 4+5 of the round key at counter 1
    ISucSpec spec = ISucSpec::create_unchecked(identity_layer(), luts);
    for (int r = 0; r <= 30; ++r) {
        uint64_t expect = (r == 1 || r == 29) ? (uint64_t{1} << 9 | 0x2) : 0;
        CHECK(spec.round_key(r) == expect);
    }
    CHECK_THROWS_AS(spec.round_key(31), SucError);

    Trng rng = test_rng(3);
    ISucSpec inst = random_instance(rng);
    for (int r = 0; r <= 30; ++r) {
        CHECK(nibble_xor(inst.round_key(r)) == 0);
        CHECK(check_commutation(inst.round_key(r)));
    }
}

TEST_CASE("create demands optimal involutions") {
    ISucSpec::LutArray luts{};
    try {
        ISucSpec::create(identity_layer(), luts);  // involutions, not optimal
        CHECK(false);
    } catch (const SucError& e) {
        CHECK(e.code() == Errc::invalid_spec);
    }
    auto layer = identity_layer();
    layer[4] = kOptimalNonInvolution;  // optimal, not an involution
    CHECK_THROWS_AS(ISucSpec::create_unchecked(layer, luts), SucError);
}

TEST_CASE("identity involutions with zero keys reduce to the diffusion") {
    ISucSpec spec = ISucSpec::create_unchecked(identity_layer(), {});
    Trng rng = test_rng(4);
    for (int i = 0; i < 1000; ++i) {
        uint64_t x = rng.draw_bits(64);
        CHECK(spec.apply(x) == diffuse(x));
    }
}

TEST_CASE("the whole mapping is an involution") {
    Trng rng = test_rng(5);
    for (int inst = 0; inst < 3; ++inst) {
        ISucSpec spec = random_instance(rng);
        int moved = 0;
        for (int i = 0; i < 10000; ++i) {
            uint64_t x = rng.draw_bits(64);
            uint64_t y = spec.apply(x);
            moved += y != x;
            CHECK(spec.apply(y) == x);
        }
        CHECK(moved == 10000);
    }
}

TEST_CASE("substitution layer is an involution on the state") {
    Trng rng = test_rng(6);
    ISucSpec spec = random_instance(rng);
    for (int i = 0; i < 1000; ++i) {
        uint64_t x = rng.draw_bits(64);
        uint64_t y = spec.substitution_layer(x);
        for (int nib = 0; nib < 16; ++nib) {
            uint8_t in = uint8_t(x >> (4 * nib) & 0xF);
            CHECK(uint8_t(y >> (4 * nib) & 0xF) == spec.sboxes()[nib](in));
        }
        CHECK(spec.substitution_layer(y) == x);
    }
}

TEST_CASE("distance trace conventions") {
    Trng rng = test_rng(7);
    ISucSpec spec = random_instance(rng);

    uint64_t x = rng.draw_bits(64);
    auto zero = spec.trace_pair(x, x);
    for (int d : zero) CHECK(d == 0);

    auto t = spec.trace(x, 17);
    CHECK(t == spec.trace_pair(x, x ^ (uint64_t{1} << 17)));
    CHECK(t[0] <= 4);  // distance right after the first substitution layer
    CHECK(std::popcount(spec.apply(x) ^ spec.apply(x ^ (uint64_t{1} << 17))) == t[31]);

    CHECK_THROWS_AS(spec.trace(x, -1), SucError);
}
