#include <suc/cipher_i.hpp>

#include <bit>

#include <suc/errors.hpp>

namespace suc {

using sbox::SBox4;

namespace {

constexpr uint64_t kNibbleOnes = 0x1111111111111111ULL;

uint64_t nibble_fold(uint64_t x) {
    x ^= x >> 32;
    x ^= x >> 16;
    x ^= x >> 8;
    x ^= x >> 4;
    return x & 0xF;
}

}  // namespace

uint64_t diffuse(uint64_t x) { return x ^ kNibbleOnes * nibble_fold(x); }

bool check_commutation(uint64_t k, uint64_t* counterexample) {
    if (nibble_fold(k) == 0) return true;
    // diffuse(0 ^ k) != diffuse(0) ^ k whenever diffuse(k) != k.
    if (counterexample) *counterexample = 0;
    return false;
}

ISucSpec::ISucSpec(const SBoxArray& sboxes, const LutArray& key_luts)
    : sboxes_(sboxes), key_luts_(key_luts) {
    for (int c = 0; c < 16; ++c) {
        uint64_t rk = 0;
        for (int j = 0; j < 60; ++j) rk |= uint64_t{(key_luts_[j] >> c) & 1u} << (4 + j);
        rk |= nibble_fold(rk);  // derived nibble 0 zeroes the nibble XOR
        rk_[c] = rk;
    }
    for (int p = 0; p < 8; ++p) {
        const SBox4& lo = sboxes_[2 * p];
        const SBox4& hi = sboxes_[2 * p + 1];
        for (int v = 0; v < 256; ++v)
            sub_[p][v] = static_cast<uint8_t>(lo(v & 0xF) | hi(v >> 4) << 4);
    }
}

ISucSpec ISucSpec::create(const SBoxArray& sboxes, const LutArray& key_luts) {
    for (const SBox4& s : sboxes)
        if (!sbox::is_optimal(s) || !sbox::is_involution(s))
            raise(Errc::invalid_spec, "substitution layer requires optimal involutions");
    return ISucSpec(sboxes, key_luts);
}

ISucSpec ISucSpec::create_unchecked(const SBoxArray& sboxes, const LutArray& key_luts) {
    for (const SBox4& s : sboxes)
        if (!sbox::is_involution(s))
            raise(Errc::invalid_spec, "S-boxes must be involutions");
    return ISucSpec(sboxes, key_luts);
}

uint64_t ISucSpec::round_key(int r) const {
    if (r < 0 || r >= kRoundKeys)
        raise(Errc::index_out_of_range, "round-key index outside [0,30]");
    return rk_[std::min(r, kRoundKeys - 1 - r)];
}

uint64_t ISucSpec::substitution_layer(uint64_t x) const {
    uint64_t out = 0;
    for (int b = 0; b < 8; ++b)
        out |= uint64_t{sub_[b][(x >> (8 * b)) & 0xFF]} << (8 * b);
    return out;
}

uint64_t ISucSpec::apply(uint64_t x) const {
    uint64_t state = substitution_layer(x);
    for (int r = 0; r < kRoundKeys; ++r) {
        state = diffuse(state);
        state ^= rk_[std::min(r, kRoundKeys - 1 - r)];
        state = substitution_layer(state);
    }
    return state;
}

std::array<int, ISucSpec::kLayers> ISucSpec::trace(uint64_t x, int flip_bit) const {
    if (flip_bit < 0 || flip_bit > 63)
        raise(Errc::index_out_of_range, "flip_bit outside [0,63]");
    return trace_pair(x, x ^ (uint64_t{1} << flip_bit));
}

std::array<int, ISucSpec::kLayers> ISucSpec::trace_pair(uint64_t x0, uint64_t x1) const {
    std::array<int, kLayers> dist{};
    uint64_t a = substitution_layer(x0);
    uint64_t b = substitution_layer(x1);
    dist[0] = std::popcount(a ^ b);
    for (int r = 0; r < kRoundKeys; ++r) {
        const uint64_t rk = rk_[std::min(r, kRoundKeys - 1 - r)];
        a = substitution_layer(diffuse(a) ^ rk);
        b = substitution_layer(diffuse(b) ^ rk);
        dist[r + 1] = std::popcount(a ^ b);
    }
    return dist;
}

}  // namespace suc
