#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <suc/cipher_i.hpp>
#include <suc/cipher_ni.hpp>
#include <suc/trng.hpp>

namespace suc::genie {

enum class CipherKind : uint8_t { ni = 0, i = 1 };

enum class RegionKind : uint8_t { sbox_layer = 0, key_bank = 1, meta = 2 };

struct Region {
    uint16_t id = 0;
    RegionKind kind = RegionKind::meta;
    uint32_t offset = 0;  // body-relative
    uint32_t length = 0;
};

// In-memory image of a device configuration. Serialized form (all integers
// little-endian): magic "SUCB", version u16, flag byte (bit 0 = locked,
// others reserved), directory count u16, directory entries of
// (id u16, kind u8, offset u32, length u32), body length u32, body bytes.
// Template regions are disjoint and lie inside the body; the SBOX_LAYER
// region holds 16 8-byte LUT blocks, the KEY_BANK region the key LUT words
// (128 bytes for the 31-round cipher, 120 for the involutive one), and the
// 1-byte META region the cipher kind.
struct VirtualBitstream {
    uint16_t version = 1;
    bool locked = false;
    std::vector<Region> directory;
    std::vector<uint8_t> body;
};

// Randomness spent by one personalization. total_bytes covers the budgeted
// draw (index selections plus key bits); rejection overdraw is kept apart so
// budgets stay comparable across runs.
struct EntropyLedger {
    uint64_t selection_bits = 0;
    uint64_t key_bits = 0;
    uint64_t overdraw_bits = 0;

    uint64_t total_bytes() const { return (selection_bits + key_bits + 7) / 8; }
};

inline constexpr std::size_t kMaxPayloadBytes = std::size_t{1} << 24;
inline constexpr std::size_t kSBoxRegionBytes = 128;

// Identical inputs give byte-identical bitstreams: the unit-independent
// design template. Template regions are zero-filled; the application payload
// is copied verbatim ahead of them. PayloadTooLarge above 2^24 bytes.
VirtualBitstream build_template(std::span<const uint8_t> app_payload, CipherKind kind);

// Fills the S-box region with 16 sampled boxes (involutive census draws for
// the involutive kind, strict single-bit-criteria census draws otherwise)
// and the key bank with raw generator bytes. Bytes outside template regions
// are untouched. AlreadyLocked on locked input, MalformedDirectory on a bad
// region table.
std::pair<VirtualBitstream, EntropyLedger> personalize(const VirtualBitstream& bs,
                                                       Trng& trng);

// One-way configuration lock: NotPersonalized while the S-box region still
// has the template fill; idempotent afterwards.
VirtualBitstream lock(VirtualBitstream bs);

using SucInstance = std::variant<NiSucSpec, ISucSpec>;

// Rebuilds the cipher from the template regions. MalformedDirectory /
// DefaultTemplateNotPersonalized / InvalidSpec on bad input.
SucInstance load_device(const VirtualBitstream& bs);

CipherKind bitstream_kind(const VirtualBitstream& bs);
bool is_personalized(const VirtualBitstream& bs);
std::vector<uint8_t> region_bytes(const VirtualBitstream& bs, RegionKind kind);

CipherKind instance_kind(const SucInstance& dev);
uint64_t instance_encrypt(const SucInstance& dev, uint64_t x);
uint64_t instance_decrypt(const SucInstance& dev, uint64_t y);

// Template -> personalize -> load, with an empty payload. The short path for
// statistics and tests that want a fresh random instance.
SucInstance forge_instance(CipherKind kind, Trng& rng);

// set_size * bits_per_entry / 2^20; exact (power-of-two divisor).
double genie_storage_cost(uint64_t set_size, uint64_t bits_per_entry);

std::vector<uint8_t> to_bytes(const VirtualBitstream& bs);
VirtualBitstream from_bytes(std::span<const uint8_t> bytes);
void save_bitstream(const std::filesystem::path& path, const VirtualBitstream& bs);
VirtualBitstream load_bitstream(const std::filesystem::path& path);

}  // namespace suc::genie
