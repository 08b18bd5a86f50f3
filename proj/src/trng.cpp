#include "suc/trng.hpp"

#include <sodium.h>

#include <algorithm>
#include <bit>
#include <cstring>

namespace suc {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) raise(Errc::io_failure, "libsodium initialization failed");
}

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Trng::Trng(std::span<const uint8_t> seed, uint64_t stream_id)
    : stream_id_(stream_id), pos_(buf_.size()) {
  ensure_sodium();
  if (seed.size() != kSeedBytes)
    raise(Errc::wrong_length, "seed must be exactly 32 bytes");
  std::copy(seed.begin(), seed.end(), key_.begin());
  for (int i = 0; i < 8; ++i) nonce_[i] = uint8_t(stream_id >> (8 * i));
}

Trng Trng::from_hex_seed(std::string_view hex, uint64_t stream_id) {
  if (hex.size() != 2 * kSeedBytes)
    raise(Errc::parse_error, "seed must be 64 hex characters");
  std::array<uint8_t, kSeedBytes> seed{};
  for (std::size_t i = 0; i < kSeedBytes; ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) raise(Errc::parse_error, "seed contains a non-hex character");
    seed[i] = uint8_t(hi << 4 | lo);
  }
  return Trng(seed, stream_id);
}

Trng Trng::os_seeded(uint64_t stream_id) {
  ensure_sodium();
  std::array<uint8_t, kSeedBytes> seed{};
  randombytes_buf(seed.data(), seed.size());
  return Trng(seed, stream_id);
}

void Trng::refill() {
  std::fill(buf_.begin(), buf_.end(), 0);
  crypto_stream_chacha20_xor_ic(buf_.data(), buf_.data(), buf_.size(),
                                nonce_.data(), block_, key_.data());
  block_ += buf_.size() / 64;
  pos_ = 0;
}

uint8_t Trng::next_byte() {
  if (pos_ == buf_.size()) refill();
  return buf_[pos_++];
}

uint64_t Trng::draw_bits(unsigned n) {
  if (n > 64) raise(Errc::index_out_of_range, "cannot draw more than 64 bits at once");
  uint64_t v = 0;
  unsigned got = 0;
  while (got < n) {
    if (bitcnt_ == 0) {
      bitbuf_ = next_byte();
      bitcnt_ = 8;
    }
    unsigned take = std::min(n - got, bitcnt_);
    v |= (bitbuf_ & ((uint64_t(1) << take) - 1)) << got;
    bitbuf_ >>= take;
    bitcnt_ -= take;
    got += take;
  }
  bits_consumed_ += n;
  return v;
}

void Trng::draw_bytes(std::span<uint8_t> out) {
  for (uint8_t& b : out) b = next_byte();
  bits_consumed_ += 8 * uint64_t(out.size());
}

uint64_t Trng::uniform_below(uint64_t bound) {
  if (bound == 0) raise(Errc::index_out_of_range, "uniform_below(0)");
  unsigned k = unsigned(std::bit_width(bound - 1));
  for (;;) {
    uint64_t v = draw_bits(k);
    if (v < bound) return v;
  }
}

}  // namespace suc
