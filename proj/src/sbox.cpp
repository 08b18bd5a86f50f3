#include "suc/sbox.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <string>

#include "suc/trng.hpp"

namespace suc::sbox {

namespace {

void require_nibbles(const SBox4& s) {
  for (uint8_t v : s.table)
    if (v > 15) raise(Errc::invalid_sbox, "S-box entry out of nibble range");
}

int parity4(unsigned x) { return std::popcount(x & 0xFu) & 1; }

}  // namespace

DiffTable diff_table(const SBox4& s) {
  require_nibbles(s);
  DiffTable t;
  for (int a = 0; a < 16; ++a)
    for (int x = 0; x < 16; ++x)
      ++t.entry[a][s.table[x ^ a] ^ s.table[x]];
  return t;
}

LinTable lin_table(const SBox4& s) {
  require_nibbles(s);
  LinTable t;
  for (int b = 0; b < 16; ++b) {
    // Walsh transform of x -> (-1)^(b.S(x)) gives all a-rows at once.
    int w[16];
    for (int x = 0; x < 16; ++x) w[x] = parity4(b & s.table[x]) ? -1 : 1;
    for (int len = 1; len < 16; len <<= 1)
      for (int i = 0; i < 16; i += len << 1)
        for (int j = i; j < i + len; ++j) {
          int u = w[j], v = w[j + len];
          w[j] = u + v;
          w[j + len] = u - v;
        }
    for (int a = 0; a < 16; ++a) t.entry[a][b] = uint8_t(std::abs(w[a]));
  }
  return t;
}

int diff_uniformity(const DiffTable& t) {
  int m = 0;
  for (int a = 1; a < 16; ++a)
    for (int b = 0; b < 16; ++b) m = std::max(m, int(t.entry[a][b]));
  return m;
}

int linearity(const LinTable& t) {
  int m = 0;
  for (int a = 0; a < 16; ++a)
    for (int b = 1; b < 16; ++b) m = std::max(m, int(t.entry[a][b]));
  return m;
}

bool is_bijection(const SBox4& s) {
  require_nibbles(s);
  uint16_t seen = 0;
  for (uint8_t v : s.table) seen |= uint16_t(1) << v;
  return seen == 0xFFFF;
}

bool is_optimal(const SBox4& s) {
  if (!is_bijection(s)) return false;
  return diff_uniformity(diff_table(s)) == 4 && linearity(lin_table(s)) == 8;
}

bool is_involution(const SBox4& s) {
  require_nibbles(s);
  for (int x = 0; x < 16; ++x)
    if (s.table[s.table[x]] != x) return false;
  return true;
}

bool has_single_bit_diffusion(const SBox4& s) {
  if (!is_bijection(s)) raise(Errc::invalid_sbox, "single-bit diffusion requires a bijection");
  DiffTable t = diff_table(s);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (t.entry[1 << i][1 << j] != 0) return false;
  return true;
}

SBox4 invert(const SBox4& s) {
  if (!is_bijection(s)) raise(Errc::not_bijective, "cannot invert a non-bijective S-box");
  SBox4 r;
  for (int x = 0; x < 16; ++x) r.table[s.table[x]] = uint8_t(x);
  return r;
}

std::array<uint8_t, 8> to_lut_block(const SBox4& s) {
  require_nibbles(s);
  std::array<uint8_t, 8> block{};
  for (int i = 0; i < 4; ++i) {
    uint16_t word = 0;
    for (int t = 0; t < 16; ++t) word |= uint16_t((s.table[t] >> i) & 1) << t;
    block[2 * i] = uint8_t(word & 0xFF);
    block[2 * i + 1] = uint8_t(word >> 8);
  }
  return block;
}

SBox4 from_lut_block(std::span<const uint8_t> block) {
  if (block.size() != 8) raise(Errc::wrong_length, "LUT block must be 8 bytes");
  SBox4 s;
  for (int i = 0; i < 4; ++i) {
    uint16_t word = uint16_t(block[2 * i]) | uint16_t(block[2 * i + 1]) << 8;
    for (int t = 0; t < 16; ++t) s.table[t] |= uint8_t((word >> t & 1) << i);
  }
  return s;
}

// ---------------------------------------------------------------------------
// GF(2) 4x4 matrices and affine equivalence
// ---------------------------------------------------------------------------

namespace {

std::array<uint8_t, 4> rows_of(const Mat4& m) {
  std::array<uint8_t, 4> rows{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) rows[r] |= uint8_t((m.col[c] >> r & 1) << c);
  return rows;
}

}  // namespace

bool Mat4::invertible() const {
  std::array<uint8_t, 4> rows = rows_of(*this);
  for (int c = 0; c < 4; ++c) {
    int pivot = -1;
    for (int r = c; r < 4; ++r)
      if (rows[r] >> c & 1) {
        pivot = r;
        break;
      }
    if (pivot < 0) return false;
    std::swap(rows[c], rows[pivot]);
    for (int r = 0; r < 4; ++r)
      if (r != c && (rows[r] >> c & 1)) rows[r] ^= rows[c];
  }
  return true;
}

Mat4 Mat4::inverse() const {
  // Gauss-Jordan on [M | I] packed into 8-bit rows.
  std::array<uint8_t, 4> rows = rows_of(*this);
  std::array<uint8_t, 4> aug{};
  for (int r = 0; r < 4; ++r) aug[r] = uint8_t(rows[r] | (1 << (4 + r)));
  for (int c = 0; c < 4; ++c) {
    int pivot = -1;
    for (int r = c; r < 4; ++r)
      if (aug[r] >> c & 1) {
        pivot = r;
        break;
      }
    if (pivot < 0) raise(Errc::invalid_sbox, "matrix is singular");
    std::swap(aug[c], aug[pivot]);
    for (int r = 0; r < 4; ++r)
      if (r != c && (aug[r] >> c & 1)) aug[r] ^= aug[c];
  }
  Mat4 inv;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (aug[r] >> (4 + c) & 1) inv.col[c] |= uint8_t(1 << r);
  return inv;
}

SBox4 AffinePair::apply(const SBox4& s) const {
  SBox4 r;
  for (int x = 0; x < 16; ++x)
    r.table[x] = uint8_t(B.mul(s.table[A.mul(uint8_t(x)) ^ a]) ^ b);
  return r;
}

AffinePair AffinePair::random(Trng& rng) {
  auto rand_invertible = [&rng] {
    for (;;) {
      uint64_t bits = rng.draw_bits(16);
      Mat4 m;
      for (int c = 0; c < 4; ++c) m.col[c] = uint8_t(bits >> (4 * c) & 0xF);
      if (m.invertible()) return m;
    }
  };
  AffinePair p;
  p.A = rand_invertible();
  p.B = rand_invertible();
  p.a = uint8_t(rng.draw_bits(4));
  p.b = uint8_t(rng.draw_bits(4));
  return p;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of involutive optimal S-boxes
// ---------------------------------------------------------------------------

namespace {

bool is_single_bit(unsigned v) { return std::has_single_bit(v & 0xFu); }

// Lin must be exactly 8 and single-bit mask pairs must stay below bias 4
// (the "almost resilient" census bound, shared by both censuses).
bool lin_census_ok(const std::array<uint8_t, 16>& s) {
  int maxabs = 0;
  for (int b = 1; b < 16; ++b) {
    int w[16];
    for (int x = 0; x < 16; ++x) w[x] = parity4(unsigned(b & s[x])) ? -1 : 1;
    for (int len = 1; len < 16; len <<= 1)
      for (int i = 0; i < 16; i += len << 1)
        for (int j = i; j < i + len; ++j) {
          int u = w[j], v = w[j + len];
          w[j] = u + v;
          w[j + len] = u - v;
        }
    bool b_single = is_single_bit(unsigned(b));
    for (int a = 0; a < 16; ++a) {
      int v = std::abs(w[a]);
      if (v > 8) return false;
      if (b_single && v > 4 && is_single_bit(unsigned(a))) return false;
      maxabs = std::max(maxabs, v);
    }
  }
  return maxabs == 8;
}

// Depth-first walk over involutions of {0..15}: the smallest free point is
// either fixed or paired with a larger free point, so each involution is
// produced once, in lexicographic table order. A running pair-difference
// count prunes any branch whose partial DDT already exceeds 4 (2 on
// single-bit-to-single-bit cells).
class InvolutionEnumerator {
 public:
  std::vector<SBox4> run() {
    s_.fill(0xFF);
    for (unsigned a = 0; a < 16; ++a)
      for (unsigned b = 0; b < 16; ++b)
        limit_[a * 16 + b] =
            uint8_t(is_single_bit(a) && is_single_bit(b) ? 2 : 4);
    out_.reserve(150000);
    rec();
    return std::move(out_);
  }

 private:
  bool bump(unsigned a, unsigned b) {
    unsigned idx = a * 16 + b;
    cnt_[idx] += 2;
    trail_[ntrail_++] = uint16_t(idx);
    return cnt_[idx] <= limit_[idx];
  }

  void unwind(int mark) {
    while (ntrail_ > mark) cnt_[trail_[--ntrail_]] -= 2;
  }

  void rec() {
    int x = -1;
    for (int i = 0; i < 16; ++i)
      if (s_[i] == 0xFF) {
        x = i;
        break;
      }
    if (x < 0) {
      finalize();
      return;
    }
    {
      int mark = ntrail_;
      bool ok = true;
      for (int i = 0; i < ndet_ && ok; ++i) {
        int v = det_[i];
        ok = bump(unsigned(x ^ v), unsigned(x ^ s_[v]));
      }
      if (ok) {
        s_[x] = uint8_t(x);
        det_[ndet_++] = uint8_t(x);
        rec();
        --ndet_;
        s_[x] = 0xFF;
      }
      unwind(mark);
    }
    for (int y = x + 1; y < 16; ++y) {
      if (s_[y] != 0xFF) continue;
      int mark = ntrail_;
      bool ok = bump(unsigned(x ^ y), unsigned(x ^ y));
      for (int i = 0; i < ndet_ && ok; ++i) {
        int v = det_[i];
        ok = bump(unsigned(x ^ v), unsigned(y ^ s_[v])) &&
             bump(unsigned(y ^ v), unsigned(x ^ s_[v]));
      }
      if (ok) {
        s_[x] = uint8_t(y);
        s_[y] = uint8_t(x);
        det_[ndet_++] = uint8_t(x);
        det_[ndet_++] = uint8_t(y);
        rec();
        ndet_ -= 2;
        s_[x] = s_[y] = 0xFF;
      }
      unwind(mark);
    }
  }

  void finalize() {
    // cnt_ now equals the full DDT; the walk guarantees the per-cell limits.
    int dmax = 0;
    for (int a = 1; a < 16; ++a)
      for (int b = 0; b < 16; ++b) dmax = std::max(dmax, int(cnt_[a * 16 + b]));
    if (dmax != 4) return;
    if (!lin_census_ok(s_)) return;
    out_.push_back(SBox4{s_});
  }

  std::array<uint8_t, 16> s_{};
  std::array<uint8_t, 16> det_{};
  int ndet_ = 0;
  std::array<uint8_t, 256> cnt_{};
  std::array<uint8_t, 256> limit_{};
  std::array<uint16_t, 128> trail_{};
  int ntrail_ = 0;
  std::vector<SBox4> out_;
};

// Depth-first walk over all bijections, assigning S(0), S(1), ... with the
// same incremental pair-difference pruning, but with single-bit DDT cells
// capped at 0. S(0) is pinned to 0: XORing any census member by a constant
// preserves every criterion and changes S(0), so the census is exactly the
// 16 output translates of the S(0) = 0 representatives.
class SingleBitEnumerator {
 public:
  std::vector<SBox4> run() {
    for (unsigned a = 0; a < 16; ++a)
      for (unsigned b = 0; b < 16; ++b)
        limit_[a * 16 + b] = uint8_t(is_single_bit(a) && is_single_bit(b) ? 0 : 4);
    reps_.reserve(110000);
    s_[0] = 0;
    used_ = 1;
    rec(1);
    std::vector<SBox4> out;
    out.reserve(reps_.size() * 16);
    for (const SBox4& rep : reps_)
      for (uint8_t d = 0; d < 16; ++d) {
        SBox4 s = rep;
        for (auto& v : s.table) v ^= d;
        out.push_back(s);
      }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void rec(int x) {
    if (x == 16) {
      int dmax = 0;
      for (int a = 1; a < 16; ++a)
        for (int b = 0; b < 16; ++b) dmax = std::max(dmax, int(cnt_[a * 16 + b]));
      if (dmax == 4 && lin_census_ok(s_)) reps_.push_back(SBox4{s_});
      return;
    }
    for (int v = 0; v < 16; ++v) {
      if (used_ >> v & 1) continue;
      int mark = ntrail_;
      bool ok = true;
      for (int u = 0; u < x && ok; ++u) {
        unsigned idx = unsigned(x ^ u) * 16 + unsigned(v ^ s_[u]);
        cnt_[idx] += 2;
        trail_[ntrail_++] = uint16_t(idx);
        ok = cnt_[idx] <= limit_[idx];
      }
      if (ok) {
        s_[x] = uint8_t(v);
        used_ |= uint16_t(1) << v;
        rec(x + 1);
        used_ &= uint16_t(~(1u << v));
      }
      while (ntrail_ > mark) cnt_[trail_[--ntrail_]] -= 2;
    }
  }

  std::array<uint8_t, 16> s_{};
  uint16_t used_ = 0;
  std::array<uint8_t, 256> cnt_{};
  std::array<uint8_t, 256> limit_{};
  std::array<uint16_t, 256> trail_{};
  int ntrail_ = 0;
  std::vector<SBox4> reps_;
};

}  // namespace

std::vector<SBox4> enumerate_involutive_optimal() {
  return InvolutionEnumerator{}.run();
}

std::vector<SBox4> enumerate_optimal_single_bit() {
  return SingleBitEnumerator{}.run();
}

// ---------------------------------------------------------------------------
// Cache file
// ---------------------------------------------------------------------------

namespace {

const char* cache_magic(bool involutive) { return involutive ? "SBX1" : "SBX2"; }

const std::vector<SBox4>& shared_library(
    const std::optional<std::filesystem::path>& path, bool involutive,
    const char* env_var, const char* default_name) {
  static std::mutex mu;
  static std::map<std::string, std::vector<SBox4>> cache;
  std::filesystem::path p;
  if (path) {
    p = *path;
  } else if (const char* env = std::getenv(env_var)) {
    p = env;
  } else {
    p = default_name;
  }
  std::scoped_lock lock(mu);
  auto [it, inserted] = cache.try_emplace(p.string());
  if (inserted) it->second = load_or_build_cache(p, involutive);
  return it->second;
}

}  // namespace

void save_cache(const std::filesystem::path& path, const std::vector<SBox4>& set,
                bool involutive) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::cache_write_failure, "cannot open " + tmp.string());
    out.write(cache_magic(involutive), 4);
    uint32_t n = uint32_t(set.size());
    uint8_t hdr[4] = {uint8_t(n), uint8_t(n >> 8), uint8_t(n >> 16), uint8_t(n >> 24)};
    out.write(reinterpret_cast<const char*>(hdr), 4);
    for (const SBox4& s : set) {
      auto block = to_lut_block(s);
      out.write(reinterpret_cast<const char*>(block.data()), block.size());
    }
    if (!out) raise(Errc::cache_write_failure, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) raise(Errc::cache_write_failure, "rename failed: " + ec.message());
}

std::optional<std::vector<SBox4>> load_cache(const std::filesystem::path& path,
                                             bool involutive) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  uint8_t hdr[4];
  if (!in.read(magic, 4) || std::memcmp(magic, cache_magic(involutive), 4) != 0)
    return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(hdr), 4)) return std::nullopt;
  uint32_t n = uint32_t(hdr[0]) | uint32_t(hdr[1]) << 8 | uint32_t(hdr[2]) << 16 |
               uint32_t(hdr[3]) << 24;
  if (n == 0 || n > (1u << 24)) return std::nullopt;
  std::vector<SBox4> set;
  set.reserve(n);
  std::array<uint8_t, 8> block;
  for (uint32_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(block.data()), block.size())) return std::nullopt;
    SBox4 s = from_lut_block(block);
    if (!is_bijection(s)) return std::nullopt;
    if (involutive && !is_involution(s)) return std::nullopt;
    set.push_back(s);
  }
  if (in.get() != std::ifstream::traits_type::eof()) return std::nullopt;
  if (!std::is_sorted(set.begin(), set.end())) return std::nullopt;
  return set;
}

std::vector<SBox4> load_or_build_cache(const std::filesystem::path& path,
                                       bool involutive) {
  if (auto cached = load_cache(path, involutive)) return std::move(*cached);
  std::vector<SBox4> set =
      involutive ? enumerate_involutive_optimal() : enumerate_optimal_single_bit();
  save_cache(path, set, involutive);
  return set;
}

const std::vector<SBox4>& involutive_optimal_library(
    const std::optional<std::filesystem::path>& path) {
  return shared_library(path, true, "SUC_SBOX_CACHE", "suc_sbox_cache.sbx");
}

const std::vector<SBox4>& optimal_single_bit_library(
    const std::optional<std::filesystem::path>& path) {
  return shared_library(path, false, "SUC_SBOX_CACHE_NI", "suc_sbox_cache_ni.sbx");
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

SBox4 sample_optimal(Trng& rng, bool require_involution,
                     bool require_single_bit_diffusion,
                     const std::vector<SBox4>& base_set) {
  if (base_set.empty()) raise(Errc::invalid_sbox, "empty S-box base set");
  constexpr int kMaxRetries = 10000;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    SBox4 s = base_set[size_t(rng.uniform_below(base_set.size()))];
    if (require_involution && !is_involution(s)) continue;
    if (require_single_bit_diffusion && !has_single_bit_diffusion(s)) continue;
    return s;
  }
  raise(Errc::filter_exhausted, "no S-box passed the filters after 10000 draws");
}

SBox4 sample_optimal(Trng& rng, bool require_involution,
                     bool require_single_bit_diffusion) {
  return sample_optimal(rng, require_involution, require_single_bit_diffusion,
                        require_involution ? involutive_optimal_library()
                                           : optimal_single_bit_library());
}

}  // namespace suc::sbox
