#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "suc/errors.hpp"

namespace suc {
class Trng;
}

namespace suc::sbox {

// A 4-bit S-box. table[x] is S(x); entries must be nibbles (0..15).
struct SBox4 {
  std::array<uint8_t, 16> table{};

  uint8_t operator()(uint8_t x) const { return table[x & 0xF]; }
  bool operator==(const SBox4&) const = default;
  auto operator<=>(const SBox4&) const = default;  // lexicographic on entries
};

// Differential distribution table. entry[a][b] counts x with
// S(x ^ a) ^ S(x) == b. Row sums are 16; entries are even.
struct DiffTable {
  std::array<std::array<uint8_t, 16>, 16> entry{};
};

// Linear approximation table (absolute biases). entry[a][b] is
// |2*#{x : a.x == b.S(x)} - 16| where "." is the GF(2) dot product.
struct LinTable {
  std::array<std::array<uint8_t, 16>, 16> entry{};
};

DiffTable diff_table(const SBox4& s);
LinTable lin_table(const SBox4& s);

// Max DDT entry over a != 0 (all b).
int diff_uniformity(const DiffTable& t);
// Max LAT entry over b != 0 (a arbitrary; for bijections the a = 0 column is
// zero, so this equals the a != 0, b != 0 maximum there).
int linearity(const LinTable& t);

bool is_bijection(const SBox4& s);
// Bijective with differential uniformity 4 and linearity 8 (the best values
// reachable by any 4-bit bijection).
bool is_optimal(const SBox4& s);
bool is_involution(const SBox4& s);
// No single-bit input difference maps to a single-bit output difference
// (and, by symmetry of the inverse, vice versa for involutions).
bool has_single_bit_diffusion(const SBox4& s);
SBox4 invert(const SBox4& s);

// Hardware LUT image: word i (16-bit little-endian) holds output bit y_i as a
// truth table over the 4 input bits, i.e. bit t of word i = bit i of S(t).
// The identity box serializes to words 0xAAAA, 0xCCCC, 0xF0F0, 0xFF00.
std::array<uint8_t, 8> to_lut_block(const SBox4& s);
SBox4 from_lut_block(std::span<const uint8_t> block);

// Invertible 4x4 matrix over GF(2), stored as columns (col[i] = M * e_i).
struct Mat4 {
  std::array<uint8_t, 4> col{};

  uint8_t mul(uint8_t x) const {
    uint8_t r = 0;
    for (int i = 0; i < 4; ++i)
      if (x >> i & 1) r ^= col[i];
    return r;
  }
  bool invertible() const;
  Mat4 inverse() const;  // pre: invertible
};

// Affine transform pair: s'(x) = B * s(A*x ^ a) ^ b. Both A and B invertible,
// so differential uniformity and linearity are preserved.
struct AffinePair {
  Mat4 A, B;
  uint8_t a = 0, b = 0;

  SBox4 apply(const SBox4& s) const;
  // Draws A, B by 16-bit rejection until invertible, then a and b.
  static AffinePair random(Trng& rng);
};

// Exhaustive census of involutive 4-bit S-boxes that are optimal and keep
// single-bit transitions rare, in lexicographic order. Membership: bijective
// involution, Diff = 4, Lin = 8, every single-bit-to-single-bit DDT entry
// <= 2 (strict zero is impossible for involutions) and every single-bit-to-
// single-bit |LAT| entry <= 4. Exact cardinality: 145920.
std::vector<SBox4> enumerate_involutive_optimal();

// Exhaustive census of all optimal 4-bit S-boxes with the strict single-bit
// criteria: Diff = 4, Lin = 8, DDT[e_i][e_j] = 0 and |LAT[e_i][e_j]| <= 4
// for single bits e_i, e_j. These are the boxes the bit-permutation cipher
// draws from. Lexicographic order. Exact cardinality: 1622016.
std::vector<SBox4> enumerate_optimal_single_bit();

// Cache container: 4-byte magic, u32 LE count, then count 8-byte LUT blocks
// in lexicographic table order. Magic "SBX1" marks the involutive census,
// "SBX2" the single-bit-criteria census. Writes are atomic (temp + rename).
void save_cache(const std::filesystem::path& path, const std::vector<SBox4>& set,
                bool involutive);
std::optional<std::vector<SBox4>> load_cache(const std::filesystem::path& path,
                                             bool involutive);
std::vector<SBox4> load_or_build_cache(const std::filesystem::path& path,
                                       bool involutive);

// Shared census instances, built on first use and memoized per process.
// Path resolution: explicit argument > env var > default file in the working
// directory (SUC_SBOX_CACHE / suc_sbox_cache.sbx for the involutive census,
// SUC_SBOX_CACHE_NI / suc_sbox_cache_ni.sbx for the single-bit census).
const std::vector<SBox4>& involutive_optimal_library(
    const std::optional<std::filesystem::path>& path = std::nullopt);
const std::vector<SBox4>& optimal_single_bit_library(
    const std::optional<std::filesystem::path>& path = std::nullopt);

// Uniform index draw from a census, with an optional rejection filter.
// require_involution selects the involutive census, otherwise the
// single-bit-criteria census. require_single_bit_diffusion rejection-filters
// on has_single_bit_diffusion; no involution passes it (measured: 0 of
// 145920), so that combination exhausts honestly. Throws filter_exhausted
// after 10000 rejected draws.
SBox4 sample_optimal(Trng& rng, bool require_involution,
                     bool require_single_bit_diffusion,
                     const std::vector<SBox4>& base_set);
SBox4 sample_optimal(Trng& rng, bool require_involution,
                     bool require_single_bit_diffusion);

}  // namespace suc::sbox
