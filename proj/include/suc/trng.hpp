#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "suc/errors.hpp"

namespace suc {

// Deterministic random bit generator standing in for the manufacturer's
// entropy source. ChaCha20 keystream: the 32-byte seed is the key, the
// stream id (little-endian) is the nonce, so one seed yields independent
// reproducible substreams. Bits come off a single byte stream LSB-first;
// byte draws take the next whole bytes of the same stream. Every draw adds
// to the consumed-bit counter (8 per byte).
class Trng {
 public:
  static constexpr std::size_t kSeedBytes = 32;

  explicit Trng(std::span<const uint8_t> seed, uint64_t stream_id = 0);

  // Seed given as 64 hex characters.
  static Trng from_hex_seed(std::string_view hex, uint64_t stream_id = 0);
  // Seed drawn from the operating system (non-reproducible).
  static Trng os_seeded(uint64_t stream_id = 0);

  // n in [0, 64]; bit k of the result is the k-th bit drawn.
  uint64_t draw_bits(unsigned n);
  void draw_bytes(std::span<uint8_t> out);
  // Uniform value in [0, bound) by rejection over bit_width(bound-1) bits.
  uint64_t uniform_below(uint64_t bound);

  uint64_t bits_consumed() const { return bits_consumed_; }
  uint64_t stream_id() const { return stream_id_; }
  std::array<uint8_t, kSeedBytes> seed() const { return key_; }

 private:
  uint8_t next_byte();
  void refill();

  std::array<uint8_t, kSeedBytes> key_{};
  std::array<uint8_t, 8> nonce_{};
  uint64_t stream_id_ = 0;
  std::array<uint8_t, 4096> buf_{};
  std::size_t pos_ = 0;
  uint64_t block_ = 0;
  uint64_t bitbuf_ = 0;
  unsigned bitcnt_ = 0;
  uint64_t bits_consumed_ = 0;
};

}  // namespace suc
