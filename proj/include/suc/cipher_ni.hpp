#pragma once

#include <array>
#include <cstdint>

#include <suc/sbox.hpp>

namespace suc {

// 64-bit state, bit 0 = least significant. Nibble i occupies bits [4i, 4i+3]
// and feeds S-box i of the substitution layer.

// Fixed wire crossing applied after every substitution layer. Output bit
// p(i) = input bit i; p spreads the 4 output bits of each S-box to 4
// distinct S-boxes of the next round.
uint64_t permute64(uint64_t x);
uint64_t permute64_inv(uint64_t x);
const std::array<uint8_t, 64>& bit_permutation();

// Non-involutive SUC instance: 31-round SPN over 16 optimal 4-bit S-boxes
// with a LUT-based key schedule. Key material is 64 LUTs of 16 bits each;
// bit c of LUT j is bit j of stored round key RK[c]. Round i uses
// RK[c(i)] with the palindromic counter c(i) = min(i, 31 - i), so the
// reversed key order used by decryption equals the forward order.
class NiSucSpec {
public:
    static constexpr int kRounds = 31;
    static constexpr std::size_t kSBoxCount = 16;
    static constexpr std::size_t kLutCount = 64;

    using SBoxArray = std::array<sbox::SBox4, kSBoxCount>;
    using LutArray = std::array<uint16_t, kLutCount>;

    // Requires every S-box optimal (InvalidSpec otherwise).
    static NiSucSpec create(const SBoxArray& sboxes, const LutArray& key_luts);
    // Requires bijectivity only; for test fixtures with degenerate layers.
    static NiSucSpec create_unchecked(const SBoxArray& sboxes, const LutArray& key_luts);

    const SBoxArray& sboxes() const { return sboxes_; }
    const LutArray& key_luts() const { return key_luts_; }

    // i in [0, 31]; IndexOutOfRange otherwise.
    uint64_t round_key(int i) const;

    uint64_t encrypt(uint64_t x) const;
    uint64_t decrypt(uint64_t y) const;

    // Hamming distance between the encryptions of x and x with flip_bit
    // toggled, recorded after each of the 31 rounds.
    std::array<int, kRounds> trace(uint64_t x, int flip_bit) const;
    // Same, for an arbitrary pair of plaintexts.
    std::array<int, kRounds> trace_pair(uint64_t x0, uint64_t x1) const;

    // One application of the 16-S-box layer (and its inverse).
    uint64_t substitution_layer(uint64_t x) const;
    uint64_t substitution_layer_inv(uint64_t x) const;

private:
    NiSucSpec(const SBoxArray& sboxes, const LutArray& key_luts);

    SBoxArray sboxes_;
    LutArray key_luts_;
    std::array<uint64_t, 16> rk_;
    // Byte-wide fused tables: entry [p][v] substitutes nibbles 2p (low) and
    // 2p+1 (high) of state byte p.
    std::array<std::array<uint8_t, 256>, 8> fwd_;
    std::array<std::array<uint8_t, 256>, 8> inv_;
};

}  // namespace suc
