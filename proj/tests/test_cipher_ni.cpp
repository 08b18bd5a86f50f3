#include <doctest.h>

#include <array>
#include <bit>
#include <cstdint>
#include <set>

#include <suc/cipher_ni.hpp>
#include <suc/errors.hpp>
#include <suc/sbox.hpp>
#include <suc/trng.hpp>

using namespace suc;

namespace {

const sbox::SBox4 kIdentityBox{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}};

NiSucSpec::SBoxArray identity_layer() {
    NiSucSpec::SBoxArray boxes;
    boxes.fill(kIdentityBox);
    return boxes;
}

Trng test_rng(uint64_t stream) {
    std::array<uint8_t, Trng::kSeedBytes> seed{};
    seed.fill(0xd4);
    return Trng(seed, stream);
}

NiSucSpec random_instance(Trng& rng) {
    NiSucSpec::SBoxArray boxes;
    for (auto& b : boxes) b = sbox::sample_optimal(rng, false, true);
    NiSucSpec::LutArray luts;
    for (auto& w : luts) w = uint16_t(rng.draw_bits(16));
    return NiSucSpec::create(boxes, luts);
}

}  // namespace

TEST_CASE("wire crossing: closed form, bijection, full fanout") {
    const auto& p = bit_permutation();
    std::set<int> seen;
    for (int i = 0; i < 64; ++i) {
        int expect = 4 * (i % 8) + (i / 8) / 2 + 32 * ((i / 8) % 2);
        CHECK(p[i] == expect);
        seen.insert(p[i]);
    }
    CHECK(seen.size() == 64);
    CHECK(p[1] == 4);
    CHECK(p[16] == 1);

    // the 4 output bits of every box hit 4 distinct boxes
    for (int box = 0; box < 16; ++box) {
        std::set<int> targets;
        for (int t = 0; t < 4; ++t) targets.insert(p[4 * box + t] / 4);
        CHECK(targets.size() == 4);
    }

    Trng rng = test_rng(1);
    for (int i = 0; i < 1000; ++i) {
        uint64_t x = rng.draw_bits(64);
        CHECK(permute64_inv(permute64(x)) == x);
    }
    for (int i = 0; i < 64; ++i)
        CHECK(permute64(uint64_t{1} << i) == uint64_t{1} << p[i]);
}

TEST_CASE("identity layers and zero keys reduce the cipher to the crossing") {
    NiSucSpec spec = NiSucSpec::create_unchecked(identity_layer(), {});
    Trng rng = test_rng(2);
    for (int i = 0; i < 200; ++i) {
        uint64_t x = rng.draw_bits(64);
        uint64_t expect = x;
        for (int r = 0; r < 31; ++r) expect = permute64(expect);
        CHECK(spec.encrypt(x) == expect);
        CHECK(spec.decrypt(expect) == x);
    }
}

TEST_CASE("one LUT bit lands in exactly the two mirrored rounds") {
    NiSucSpec::LutArray luts{};
    luts[5] = 0x0002;  // bit 1 of LUT 5: bit 5 of the round key at counter 1
    NiSucSpec spec = NiSucSpec::create_unchecked(identity_layer(), luts);
    for (int i = 0; i <= 31; ++i) {
        uint64_t expect = (i == 1 || i == 30) ? uint64_t{1} << 5 : 0;
        CHECK(spec.round_key(i) == expect);
    }
    CHECK(spec.round_key(31) == spec.round_key(0));
    CHECK_THROWS_AS(spec.round_key(32), SucError);
    CHECK_THROWS_AS(spec.round_key(-1), SucError);
}

TEST_CASE("create rejects non-optimal layers, create_unchecked takes bijections") {
    NiSucSpec::LutArray luts{};
    try {
        NiSucSpec::create(identity_layer(), luts);
        CHECK(false);
    } catch (const SucError& e) {
        CHECK(e.code() == Errc::invalid_spec);
    }
    auto broken = identity_layer();
    broken[7].table[0] = broken[7].table[1];
    CHECK_THROWS_AS(NiSucSpec::create_unchecked(broken, luts), SucError);
}

TEST_CASE("substitution layer applies box i to nibble i") {
    Trng rng = test_rng(3);
    NiSucSpec spec = random_instance(rng);
    for (int i = 0; i < 1000; ++i) {
        uint64_t x = rng.draw_bits(64);
        uint64_t y = spec.substitution_layer(x);
        for (int nib = 0; nib < 16; ++nib) {
            uint8_t in = uint8_t(x >> (4 * nib) & 0xF);
            CHECK(uint8_t(y >> (4 * nib) & 0xF) == spec.sboxes()[nib](in));
        }
        CHECK(spec.substitution_layer_inv(y) == x);
    }
}

TEST_CASE("decrypt inverts encrypt on random instances") {
    Trng rng = test_rng(4);
    for (int inst = 0; inst < 3; ++inst) {
        NiSucSpec spec = random_instance(rng);
        int moved = 0;
        for (int i = 0; i < 2000; ++i) {
            uint64_t x = rng.draw_bits(64);
            uint64_t y = spec.encrypt(x);
            moved += y != x;
            CHECK(spec.decrypt(y) == x);
        }
        CHECK(moved == 2000);
    }
}

TEST_CASE("distance trace conventions") {
    Trng rng = test_rng(5);
    NiSucSpec spec = random_instance(rng);

    uint64_t x = rng.draw_bits(64);
    auto zero = spec.trace_pair(x, x);
    for (int d : zero) CHECK(d == 0);

    auto t = spec.trace(x, 9);
    auto tp = spec.trace_pair(x, x ^ (uint64_t{1} << 9));
    CHECK(t == tp);
    CHECK(t[0] <= 4);  // one active box after the first round
    CHECK(std::popcount(spec.encrypt(x) ^ spec.encrypt(x ^ (uint64_t{1} << 9))) == t[30]);

    double final_sum = 0;
    for (int i = 0; i < 200; ++i) {
        uint64_t v = rng.draw_bits(64);
        final_sum += spec.trace(v, int(rng.uniform_below(64)))[30];
    }
    double mean = final_sum / 200.0;
    CHECK(mean > 24.0);
    CHECK(mean < 40.0);

    CHECK_THROWS_AS(spec.trace(x, 64), SucError);
}
