#include <suc/cipher_ni.hpp>

#include <bit>

#include <suc/errors.hpp>

namespace suc {

using sbox::SBox4;

namespace {

constexpr std::array<uint8_t, 64> kPerm = {
    0,  4,  8,  12, 16, 20, 24, 28,  //
    32, 36, 40, 44, 48, 52, 56, 60,  //
    1,  5,  9,  13, 17, 21, 25, 29,  //
    33, 37, 41, 45, 49, 53, 57, 61,  //
    2,  6,  10, 14, 18, 22, 26, 30,  //
    34, 38, 42, 46, 50, 54, 58, 62,  //
    3,  7,  11, 15, 19, 23, 27, 31,  //
    35, 39, 43, 47, 51, 55, 59, 63,
};

constexpr std::array<uint8_t, 64> invert_perm(const std::array<uint8_t, 64>& p) {
    std::array<uint8_t, 64> inv{};
    for (int i = 0; i < 64; ++i) inv[p[i]] = static_cast<uint8_t>(i);
    return inv;
}

// Per input byte, the scattered 64-bit image of each of its 256 values.
using ScatterTables = std::array<std::array<uint64_t, 256>, 8>;

constexpr ScatterTables make_scatter(const std::array<uint8_t, 64>& p) {
    ScatterTables t{};
    for (int byte = 0; byte < 8; ++byte)
        for (int v = 0; v < 256; ++v) {
            uint64_t out = 0;
            for (int k = 0; k < 8; ++k)
                if (v >> k & 1) out |= uint64_t{1} << p[8 * byte + k];
            t[byte][v] = out;
        }
    return t;
}

constexpr ScatterTables kScatterFwd = make_scatter(kPerm);
constexpr ScatterTables kScatterInv = make_scatter(invert_perm(kPerm));

uint64_t scatter(const ScatterTables& t, uint64_t x) {
    uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= t[b][(x >> (8 * b)) & 0xFF];
    return out;
}

}  // namespace

const std::array<uint8_t, 64>& bit_permutation() { return kPerm; }

uint64_t permute64(uint64_t x) { return scatter(kScatterFwd, x); }

uint64_t permute64_inv(uint64_t x) { return scatter(kScatterInv, x); }

NiSucSpec::NiSucSpec(const SBoxArray& sboxes, const LutArray& key_luts)
    : sboxes_(sboxes), key_luts_(key_luts) {
    for (int c = 0; c < 16; ++c) {
        uint64_t rk = 0;
        for (int j = 0; j < 64; ++j) rk |= uint64_t{(key_luts_[j] >> c) & 1u} << j;
        rk_[c] = rk;
    }
    for (int p = 0; p < 8; ++p) {
        const SBox4& lo = sboxes_[2 * p];
        const SBox4& hi = sboxes_[2 * p + 1];
        const SBox4 lo_inv = sbox::invert(lo);
        const SBox4 hi_inv = sbox::invert(hi);
        for (int v = 0; v < 256; ++v) {
            fwd_[p][v] = static_cast<uint8_t>(lo(v & 0xF) | hi(v >> 4) << 4);
            inv_[p][v] = static_cast<uint8_t>(lo_inv(v & 0xF) | hi_inv(v >> 4) << 4);
        }
    }
}

NiSucSpec NiSucSpec::create(const SBoxArray& sboxes, const LutArray& key_luts) {
    for (const SBox4& s : sboxes)
        if (!sbox::is_optimal(s))
            raise(Errc::invalid_spec, "substitution layer requires optimal S-boxes");
    return NiSucSpec(sboxes, key_luts);
}

NiSucSpec NiSucSpec::create_unchecked(const SBoxArray& sboxes, const LutArray& key_luts) {
    for (const SBox4& s : sboxes)
        if (!sbox::is_bijection(s)) raise(Errc::invalid_spec, "S-boxes must be bijective");
    return NiSucSpec(sboxes, key_luts);
}

uint64_t NiSucSpec::round_key(int i) const {
    if (i < 0 || i > kRounds)
        raise(Errc::index_out_of_range, "round-key index outside [0,31]");
    return rk_[std::min(i, kRounds - i)];
}

uint64_t NiSucSpec::substitution_layer(uint64_t x) const {
    uint64_t out = 0;
    for (int b = 0; b < 8; ++b)
        out |= uint64_t{fwd_[b][(x >> (8 * b)) & 0xFF]} << (8 * b);
    return out;
}

uint64_t NiSucSpec::substitution_layer_inv(uint64_t x) const {
    uint64_t out = 0;
    for (int b = 0; b < 8; ++b)
        out |= uint64_t{inv_[b][(x >> (8 * b)) & 0xFF]} << (8 * b);
    return out;
}

uint64_t NiSucSpec::encrypt(uint64_t x) const {
    uint64_t state = x;
    for (int r = 0; r < kRounds; ++r) {
        state ^= rk_[std::min(r, kRounds - r)];
        state = substitution_layer(state);
        state = permute64(state);
    }
    return state ^ rk_[0];  // c(31) = 0
}

uint64_t NiSucSpec::decrypt(uint64_t y) const {
    uint64_t state = y ^ rk_[0];
    for (int r = kRounds - 1; r >= 0; --r) {
        state = permute64_inv(state);
        state = substitution_layer_inv(state);
        state ^= rk_[std::min(r, kRounds - r)];
    }
    return state;
}

std::array<int, NiSucSpec::kRounds> NiSucSpec::trace(uint64_t x, int flip_bit) const {
    if (flip_bit < 0 || flip_bit > 63)
        raise(Errc::index_out_of_range, "flip_bit outside [0,63]");
    return trace_pair(x, x ^ (uint64_t{1} << flip_bit));
}

std::array<int, NiSucSpec::kRounds> NiSucSpec::trace_pair(uint64_t x0, uint64_t x1) const {
    std::array<int, kRounds> dist{};
    uint64_t a = x0;
    uint64_t b = x1;
    for (int r = 0; r < kRounds; ++r) {
        const uint64_t rk = rk_[std::min(r, kRounds - r)];
        a = permute64(substitution_layer(a ^ rk));
        b = permute64(substitution_layer(b ^ rk));
        dist[r] = std::popcount(a ^ b);
    }
    return dist;
}

}  // namespace suc
