#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <suc/errors.hpp>
#include <suc/sbox.hpp>
#include <suc/trng.hpp>

using namespace suc;
using namespace suc::sbox;

namespace {

// Counting definitions, straight from the tables' meaning. The library uses
// different evaluation orders (Walsh transform for the correlation side), so
// agreement here is a real cross-check.
int count_ddt(const SBox4& s, int a, int b) {
    int n = 0;
    for (int x = 0; x < 16; ++x) n += (s(uint8_t(x ^ a)) ^ s(uint8_t(x))) == b;
    return n;
}

int count_lat(const SBox4& s, int a, int b) {
    int sum = 0;
    for (int x = 0; x < 16; ++x) {
        int lhs = std::popcount(unsigned(a & x)) & 1;
        int rhs = std::popcount(unsigned(b & s(uint8_t(x)))) & 1;
        sum += lhs == rhs ? 1 : -1;
    }
    return sum < 0 ? -sum : sum;
}

const SBox4 kSerpentine{{0xC, 5, 6, 0xB, 9, 0, 0xA, 0xD, 3, 0xE, 0xF, 8, 4, 7, 1, 2}};
const SBox4 kIdentity{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}};

SBox4 random_bijection(Trng& rng) {
    SBox4 s = kIdentity;
    for (int i = 15; i > 0; --i)
        std::swap(s.table[i], s.table[rng.uniform_below(uint64_t(i) + 1)]);
    return s;
}

Trng test_rng(uint64_t stream) {
    std::array<uint8_t, Trng::kSeedBytes> seed{};
    seed.fill(0x5b);
    return Trng(seed, stream);
}

}  // namespace

TEST_CASE("difference and correlation tables match their counting definitions") {
    Trng rng = test_rng(1);
    std::vector<SBox4> subjects{kSerpentine, kIdentity};
    for (int i = 0; i < 10; ++i) subjects.push_back(random_bijection(rng));
    for (const SBox4& s : subjects) {
        DiffTable dt = diff_table(s);
        LinTable lt = lin_table(s);
        for (int a = 0; a < 16; ++a)
            for (int b = 0; b < 16; ++b) {
                CHECK(dt.entry[a][b] == count_ddt(s, a, b));
                CHECK(lt.entry[a][b] == count_lat(s, a, b));
            }
    }
}

TEST_CASE("a known good box scores 4/8 and the identity does not") {
    CHECK(is_bijection(kSerpentine));
    CHECK(diff_uniformity(diff_table(kSerpentine)) == 4);
    CHECK(linearity(lin_table(kSerpentine)) == 8);
    CHECK(is_optimal(kSerpentine));
    CHECK(!is_involution(kSerpentine));

    CHECK(diff_uniformity(diff_table(kIdentity)) == 16);
    CHECK(linearity(lin_table(kIdentity)) == 16);
    CHECK(!is_optimal(kIdentity));
    CHECK(is_involution(kIdentity));
}

TEST_CASE("single-bit diffusion flag equals the table-level definition") {
    Trng rng = test_rng(2);
    std::vector<SBox4> subjects{kSerpentine, kIdentity};
    for (int i = 0; i < 30; ++i) subjects.push_back(random_bijection(rng));
    for (const SBox4& s : subjects) {
        bool expect = true;
        for (int i = 0; i < 4 && expect; ++i)
            for (int j = 0; j < 4 && expect; ++j) {
                if (count_ddt(s, 1 << i, 1 << j) != 0) expect = false;
                if (count_lat(s, 1 << i, 1 << j) > 4) expect = false;
            }
        CHECK(has_single_bit_diffusion(s) == expect);
    }
    CHECK(has_single_bit_diffusion(kSerpentine));
    CHECK(!has_single_bit_diffusion(kIdentity));
}

TEST_CASE("LUT block encoding: identity truth tables are the projection words") {
    auto block = to_lut_block(kIdentity);
    // word i holds bit i of S(t) at position t: 0xAAAA, 0xCCCC, 0xF0F0, 0xFF00
    CHECK(block[0] == 0xAA);
    CHECK(block[1] == 0xAA);
    CHECK(block[2] == 0xCC);
    CHECK(block[3] == 0xCC);
    CHECK(block[4] == 0xF0);
    CHECK(block[5] == 0xF0);
    CHECK(block[6] == 0x00);
    CHECK(block[7] == 0xFF);

    Trng rng = test_rng(3);
    for (int i = 0; i < 50; ++i) {
        SBox4 s = random_bijection(rng);
        CHECK(from_lut_block(to_lut_block(s)) == s);
    }
    uint8_t short_block[4] = {0, 0, 0, 0};
    CHECK_THROWS_AS(from_lut_block(std::span<const uint8_t>(short_block, 4)), SucError);
}

TEST_CASE("inversion composes to the identity and rejects non-bijections") {
    Trng rng = test_rng(4);
    for (int i = 0; i < 50; ++i) {
        SBox4 s = random_bijection(rng);
        SBox4 si = invert(s);
        for (int x = 0; x < 16; ++x) CHECK(si(s(uint8_t(x))) == x);
    }
    SBox4 bad = kIdentity;
    bad.table[3] = bad.table[4];
    try {
        invert(bad);
        CHECK(false);
    } catch (const SucError& e) {
        CHECK(e.code() == Errc::not_bijective);
    }
}

TEST_CASE("affine maps preserve the optimality profile") {
    Trng rng = test_rng(5);
    for (int i = 0; i < 10; ++i) {
        AffinePair map = AffinePair::random(rng);
        SBox4 t = map.apply(kSerpentine);
        CHECK(is_bijection(t));
        CHECK(diff_uniformity(diff_table(t)) == 4);
        CHECK(linearity(lin_table(t)) == 8);
    }
}

TEST_CASE("census: involutive library") {
    const auto& census = involutive_optimal_library();
    CHECK(census.size() == 145920);
    CHECK(std::is_sorted(census.begin(), census.end()));
    for (std::size_t i = 0; i < census.size(); i += 4096) {
        CHECK(is_involution(census[i]));
        CHECK(is_optimal(census[i]));
    }
}

TEST_CASE("census: no involutive optimal box meets the single-bit criteria") {
    const auto& census = involutive_optimal_library();
    std::size_t hits = 0;
    for (const SBox4& s : census) hits += has_single_bit_diffusion(s);
    CHECK(hits == 0);
}

TEST_CASE("census: single-bit library") {
    const auto& census = optimal_single_bit_library();
    CHECK(census.size() == 1622016);
    CHECK(std::is_sorted(census.begin(), census.end()));
    for (std::size_t i = 0; i < census.size(); i += 16384) {
        const SBox4& s = census[i];
        CHECK(is_optimal(s));
        CHECK(has_single_bit_diffusion(s));
    }
}

TEST_CASE("census cache round-trips and ignores corrupted files") {
    Trng rng = test_rng(6);
    std::vector<SBox4> set;
    for (int i = 0; i < 8; ++i) set.push_back(random_bijection(rng));
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());

    auto path = std::filesystem::temp_directory_path() / "suc_test_cache.sbx";
    save_cache(path, set, false);
    auto loaded = load_cache(path, false);
    REQUIRE(loaded.has_value());
    CHECK(*loaded == set);

    // wrong census family
    CHECK(!load_cache(path, true).has_value());

    // flipped magic
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('X');
    }
    CHECK(!load_cache(path, false).has_value());

    save_cache(path, set, false);
    std::filesystem::resize_file(path, 8 + 8 * set.size() - 3);
    CHECK(!load_cache(path, false).has_value());
    std::filesystem::remove(path);
}

TEST_CASE("sampling respects the filters") {
    Trng rng = test_rng(7);
    for (int i = 0; i < 20; ++i) {
        SBox4 s = sample_optimal(rng, true, false);
        CHECK(is_involution(s));
        CHECK(is_optimal(s));
        SBox4 t = sample_optimal(rng, false, true);
        CHECK(is_optimal(t));
        CHECK(has_single_bit_diffusion(t));
    }
    try {
        sample_optimal(rng, true, true);
        CHECK(false);
    } catch (const SucError& e) {
        CHECK(e.code() == Errc::filter_exhausted);
    }
    // different substreams pick different members (indices are 18+ bits wide)
    Trng a = test_rng(8), b = test_rng(9);
    bool differ = false;
    for (int i = 0; i < 8; ++i)
        differ |= !(sample_optimal(a, true, false) == sample_optimal(b, true, false));
    CHECK(differ);
}
