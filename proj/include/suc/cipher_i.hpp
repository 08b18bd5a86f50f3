#pragma once

#include <array>
#include <cstdint>

#include <suc/sbox.hpp>

namespace suc {

// XOR-sum diffusion: output nibble i = input nibble i XOR the XOR of all 16
// input nibbles. Linear over GF(2) and an involution.
uint64_t diffuse(uint64_t x);

// True iff diffuse(x ^ k) == diffuse(x) ^ k holds for every x, which is the
// case exactly when the XOR of k's 16 nibbles is zero (diffuse is linear, so
// commutation with ^k reduces to diffuse(k) == k). When false and
// counterexample is non-null, *counterexample receives an x violating the
// identity.
bool check_commutation(uint64_t k, uint64_t* counterexample = nullptr);

// Involutive SUC instance: 32 equal substitution layers of optimal involutive
// S-boxes interleaved with 31 diffuse-then-key steps. Key material is 60 LUTs
// of 16 bits each; bit c of LUT j is bit 4 + j of stored round key RK[c]
// (nibbles 1..15). Nibble 0 of every round key is the XOR of nibbles 1..15,
// which makes each key commute with diffuse. Round r uses RK[c(r)] with the
// palindromic counter c(r) = min(r, 30 - r); together with the key constraint
// this makes apply() its own inverse.
class ISucSpec {
public:
    static constexpr int kLayers = 32;
    static constexpr int kRoundKeys = 31;
    static constexpr std::size_t kSBoxCount = 16;
    static constexpr std::size_t kLutCount = 60;

    using SBoxArray = std::array<sbox::SBox4, kSBoxCount>;
    using LutArray = std::array<uint16_t, kLutCount>;

    // Requires every S-box an optimal involution (InvalidSpec otherwise).
    static ISucSpec create(const SBoxArray& sboxes, const LutArray& key_luts);
    // Requires involutions only; for test fixtures with degenerate layers.
    static ISucSpec create_unchecked(const SBoxArray& sboxes, const LutArray& key_luts);

    const SBoxArray& sboxes() const { return sboxes_; }
    const LutArray& key_luts() const { return key_luts_; }

    // r in [0, 30]; IndexOutOfRange otherwise. XOR of nibbles is always 0.
    uint64_t round_key(int r) const;

    // Self-inverse: apply(apply(x)) == x.
    uint64_t apply(uint64_t x) const;

    // Hamming distance between the images of x and x with flip_bit toggled,
    // recorded after each of the 32 substitution layers.
    std::array<int, kLayers> trace(uint64_t x, int flip_bit) const;
    std::array<int, kLayers> trace_pair(uint64_t x0, uint64_t x1) const;

    // One application of the 16-S-box layer (its own inverse here).
    uint64_t substitution_layer(uint64_t x) const;

private:
    ISucSpec(const SBoxArray& sboxes, const LutArray& key_luts);

    SBoxArray sboxes_;
    LutArray key_luts_;
    std::array<uint64_t, 16> rk_;
    std::array<std::array<uint8_t, 256>, 8> sub_;
};

}  // namespace suc
