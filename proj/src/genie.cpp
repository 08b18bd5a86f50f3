#include <suc/genie.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <suc/errors.hpp>
#include <suc/sbox.hpp>

namespace suc::genie {

namespace {

struct Layout {
    CipherKind kind;
    Region sbox;
    Region key;
    Region meta;
};

uint32_t key_bank_bytes(CipherKind kind) {
    return kind == CipherKind::ni ? 16 * NiSucSpec::kLutCount / 8
                                  : 16 * ISucSpec::kLutCount / 8;
}

// Checks the per-kind region contract; container-level bounds are already
// enforced by from_bytes and build_template.
Layout layout_of(const VirtualBitstream& bs) {
    const Region* sbox = nullptr;
    const Region* key = nullptr;
    const Region* meta = nullptr;
    for (const Region& r : bs.directory) {
        const Region** slot = r.kind == RegionKind::sbox_layer ? &sbox
                              : r.kind == RegionKind::key_bank ? &key
                                                               : &meta;
        if (*slot) raise(Errc::malformed_directory, "duplicate template region kind");
        *slot = &r;
    }
    if (!sbox || !key || !meta)
        raise(Errc::malformed_directory, "missing template region");
    for (const Region* r : {sbox, key, meta})
        if (uint64_t{r->offset} + r->length > bs.body.size())
            raise(Errc::malformed_directory, "region outside body");
    if (meta->length != 1) raise(Errc::malformed_directory, "META region must be 1 byte");
    const uint8_t kind_byte = bs.body[meta->offset];
    if (kind_byte > 1) raise(Errc::malformed_directory, "unknown cipher kind");
    const CipherKind kind = static_cast<CipherKind>(kind_byte);
    if (sbox->length != kSBoxRegionBytes)
        raise(Errc::malformed_directory, "SBOX_LAYER region must be 128 bytes");
    if (key->length != key_bank_bytes(kind))
        raise(Errc::malformed_directory, "KEY_BANK region has the wrong size");
    return Layout{kind, *sbox, *key, *meta};
}

bool region_is_zero(const VirtualBitstream& bs, const Region& r) {
    return std::all_of(bs.body.begin() + r.offset,
                       bs.body.begin() + r.offset + r.length,
                       [](uint8_t b) { return b == 0; });
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

struct Reader {
    std::span<const uint8_t> data;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (data.size() - pos < n) raise(Errc::parse_error, "truncated bitstream");
    }
    uint8_t u8() {
        need(1);
        return data[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(data[pos] | data[pos + 1] << 8);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t{data[pos + i]} << (8 * i);
        pos += 4;
        return v;
    }
};

}  // namespace

VirtualBitstream build_template(std::span<const uint8_t> app_payload, CipherKind kind) {
    if (app_payload.size() > kMaxPayloadBytes)
        raise(Errc::payload_too_large, "application payload exceeds 2^24 bytes");
    VirtualBitstream bs;
    bs.body.assign(app_payload.begin(), app_payload.end());
    const auto add_region = [&](uint16_t id, RegionKind rk, uint32_t length) {
        Region r{id, rk, uint32_t(bs.body.size()), length};
        bs.body.insert(bs.body.end(), length, 0);
        bs.directory.push_back(r);
        return r;
    };
    add_region(1, RegionKind::sbox_layer, kSBoxRegionBytes);
    add_region(2, RegionKind::key_bank, key_bank_bytes(kind));
    const Region meta = add_region(3, RegionKind::meta, 1);
    bs.body[meta.offset] = static_cast<uint8_t>(kind);
    return bs;
}

std::pair<VirtualBitstream, EntropyLedger> personalize(const VirtualBitstream& bs,
                                                       Trng& trng) {
    if (bs.locked) raise(Errc::already_locked, "bitstream is reconfiguration-locked");
    const Layout lay = layout_of(bs);
    VirtualBitstream out = bs;
    const bool involutive = lay.kind == CipherKind::i;
    const uint64_t before = trng.bits_consumed();
    for (int i = 0; i < 16; ++i) {
        const sbox::SBox4 s = sbox::sample_optimal(trng, involutive, !involutive);
        const auto block = sbox::to_lut_block(s);
        std::copy(block.begin(), block.end(), out.body.begin() + lay.sbox.offset + 8 * i);
    }
    EntropyLedger ledger;
    ledger.selection_bits = 16 * (involutive ? 18 : 21);
    ledger.key_bits = 8 * uint64_t{lay.key.length};
    trng.draw_bytes(std::span<uint8_t>(out.body.data() + lay.key.offset, lay.key.length));
    ledger.overdraw_bits =
        trng.bits_consumed() - before - ledger.selection_bits - ledger.key_bits;
    return {std::move(out), ledger};
}

VirtualBitstream lock(VirtualBitstream bs) {
    if (!is_personalized(bs))
        raise(Errc::not_personalized, "cannot lock an unpersonalized template");
    bs.locked = true;
    return bs;
}

SucInstance load_device(const VirtualBitstream& bs) {
    const Layout lay = layout_of(bs);
    if (region_is_zero(bs, lay.sbox))
        raise(Errc::default_template_not_personalized,
              "S-box region still holds the template fill");
    std::array<sbox::SBox4, 16> boxes;
    for (int i = 0; i < 16; ++i)
        boxes[i] = sbox::from_lut_block(
            std::span<const uint8_t>(bs.body.data() + lay.sbox.offset + 8 * i, 8));
    const uint8_t* kb = bs.body.data() + lay.key.offset;
    if (lay.kind == CipherKind::ni) {
        NiSucSpec::LutArray luts{};
        for (std::size_t j = 0; j < luts.size(); ++j)
            luts[j] = uint16_t(kb[2 * j] | kb[2 * j + 1] << 8);
        return NiSucSpec::create(boxes, luts);
    }
    ISucSpec::LutArray luts{};
    for (std::size_t j = 0; j < luts.size(); ++j)
        luts[j] = uint16_t(kb[2 * j] | kb[2 * j + 1] << 8);
    return ISucSpec::create(boxes, luts);
}

CipherKind bitstream_kind(const VirtualBitstream& bs) { return layout_of(bs).kind; }

bool is_personalized(const VirtualBitstream& bs) {
    const Layout lay = layout_of(bs);
    return !region_is_zero(bs, lay.sbox);
}

std::vector<uint8_t> region_bytes(const VirtualBitstream& bs, RegionKind kind) {
    const Layout lay = layout_of(bs);
    const Region& r = kind == RegionKind::sbox_layer ? lay.sbox
                      : kind == RegionKind::key_bank ? lay.key
                                                     : lay.meta;
    return std::vector<uint8_t>(bs.body.begin() + r.offset,
                                bs.body.begin() + r.offset + r.length);
}

CipherKind instance_kind(const SucInstance& dev) {
    return std::holds_alternative<NiSucSpec>(dev) ? CipherKind::ni : CipherKind::i;
}

uint64_t instance_encrypt(const SucInstance& dev, uint64_t x) {
    if (const auto* ni = std::get_if<NiSucSpec>(&dev)) return ni->encrypt(x);
    return std::get<ISucSpec>(dev).apply(x);
}

uint64_t instance_decrypt(const SucInstance& dev, uint64_t y) {
    if (const auto* ni = std::get_if<NiSucSpec>(&dev)) return ni->decrypt(y);
    return std::get<ISucSpec>(dev).apply(y);
}

SucInstance forge_instance(CipherKind kind, Trng& rng) {
    return load_device(personalize(build_template({}, kind), rng).first);
}

double genie_storage_cost(uint64_t set_size, uint64_t bits_per_entry) {
    return double(set_size) * double(bits_per_entry) / double(uint64_t{1} << 20);
}

std::vector<uint8_t> to_bytes(const VirtualBitstream& bs) {
    std::vector<uint8_t> out;
    out.reserve(13 + 11 * bs.directory.size() + bs.body.size());
    for (char c : {'S', 'U', 'C', 'B'}) out.push_back(uint8_t(c));
    put_u16(out, bs.version);
    out.push_back(bs.locked ? 1 : 0);
    put_u16(out, uint16_t(bs.directory.size()));
    for (const Region& r : bs.directory) {
        put_u16(out, r.id);
        out.push_back(static_cast<uint8_t>(r.kind));
        put_u32(out, r.offset);
        put_u32(out, r.length);
    }
    put_u32(out, uint32_t(bs.body.size()));
    out.insert(out.end(), bs.body.begin(), bs.body.end());
    return out;
}

VirtualBitstream from_bytes(std::span<const uint8_t> bytes) {
    Reader rd{bytes};
    rd.need(4);
    if (std::memcmp(bytes.data(), "SUCB", 4) != 0)
        raise(Errc::parse_error, "bad bitstream magic");
    rd.pos = 4;
    VirtualBitstream bs;
    bs.version = rd.u16();
    if (bs.version != 1) raise(Errc::parse_error, "unsupported bitstream version");
    const uint8_t flags = rd.u8();
    if (flags & ~1u) raise(Errc::parse_error, "reserved flag bits set");
    bs.locked = flags & 1;
    const uint16_t count = rd.u16();
    bs.directory.reserve(count);
    for (uint16_t i = 0; i < count; ++i) {
        Region r;
        r.id = rd.u16();
        const uint8_t kind = rd.u8();
        if (kind > 2) raise(Errc::parse_error, "unknown region kind");
        r.kind = static_cast<RegionKind>(kind);
        r.offset = rd.u32();
        r.length = rd.u32();
        bs.directory.push_back(r);
    }
    const uint32_t body_len = rd.u32();
    rd.need(body_len);
    bs.body.assign(bytes.begin() + rd.pos, bytes.begin() + rd.pos + body_len);
    rd.pos += body_len;
    if (rd.pos != bytes.size()) raise(Errc::parse_error, "trailing bytes after body");
    // Container-level region sanity: inside the body and pairwise disjoint.
    std::vector<std::pair<uint64_t, uint64_t>> spans;
    for (const Region& r : bs.directory) {
        if (uint64_t{r.offset} + r.length > bs.body.size())
            raise(Errc::malformed_directory, "region outside body");
        spans.emplace_back(r.offset, uint64_t{r.offset} + r.length);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].second)
            raise(Errc::malformed_directory, "overlapping template regions");
    return bs;
}

void save_bitstream(const std::filesystem::path& path, const VirtualBitstream& bs) {
    const std::vector<uint8_t> bytes = to_bytes(bs);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        if (!out) raise(Errc::io_failure, "cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) raise(Errc::io_failure, "cannot move bitstream into place: " + ec.message());
}

VirtualBitstream load_bitstream(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io_failure, "cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return from_bytes(bytes);
}

}  // namespace suc::genie
