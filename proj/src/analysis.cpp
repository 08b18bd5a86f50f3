#include <suc/analysis.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <suc/cipher_i.hpp>
#include <suc/cipher_ni.hpp>
#include <suc/errors.hpp>
#include <suc/sbox.hpp>

namespace suc::analysis {

namespace {

std::vector<int> trace_of(const genie::SucInstance& dev, uint64_t x0, uint64_t x1) {
    if (const auto* ni = std::get_if<NiSucSpec>(&dev)) {
        auto t = ni->trace_pair(x0, x1);
        return {t.begin(), t.end()};
    }
    auto t = std::get<ISucSpec>(dev).trace_pair(x0, x1);
    return {t.begin(), t.end()};
}

std::string format(const char* fmt, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, fmt);
    vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

}  // namespace

AvalancheReport avalanche_by_round(genie::CipherKind kind, std::size_t n_instances,
                                   std::size_t n_inputs, Trng& rng, bool control_no_flip) {
    if (n_instances == 0 || n_inputs == 0)
        raise(Errc::invalid_spec, "avalanche sample counts must be positive");
    AvalancheReport report;
    report.kind = kind;
    report.instances = n_instances;
    report.inputs = n_inputs;
    const std::size_t n_rounds =
        kind == genie::CipherKind::ni ? NiSucSpec::kRounds : ISucSpec::kLayers;
    report.rounds.resize(n_rounds);
    std::vector<double> sum(n_rounds, 0.0);
    for (std::size_t i = 0; i < n_instances; ++i) {
        genie::SucInstance dev = genie::forge_instance(kind, rng);
        for (std::size_t j = 0; j < n_inputs; ++j) {
            uint64_t x = rng.draw_bits(64);
            uint64_t x1 = control_no_flip ? x : x ^ (uint64_t{1} << rng.uniform_below(64));
            std::vector<int> dist = trace_of(dev, x, x1);
            for (std::size_t r = 0; r < n_rounds; ++r) {
                RoundStats& s = report.rounds[r];
                s.min = std::min(s.min, dist[r]);
                s.max = std::max(s.max, dist[r]);
                sum[r] += dist[r];
            }
        }
    }
    const double n = double(n_instances) * double(n_inputs);
    for (std::size_t r = 0; r < n_rounds; ++r) report.rounds[r].mean = sum[r] / n;
    return report;
}

ClassAvalancheReport class_avalanche(genie::CipherKind kind, std::size_t n_instances,
                                     std::size_t n_msgs, Trng& rng) {
    if (n_instances == 0 || n_msgs == 0)
        raise(Errc::invalid_spec, "avalanche sample counts must be positive");
    ClassAvalancheReport report;
    report.kind = kind;
    report.msgs_per_instance = n_msgs;
    report.instances.reserve(n_instances);
    for (std::size_t i = 0; i < n_instances; ++i) {
        genie::SucInstance dev = genie::forge_instance(kind, rng);
        InstanceEnvelope env;
        double sum = 0.0;
        for (std::size_t j = 0; j < n_msgs; ++j) {
            uint64_t x = rng.draw_bits(64);
            uint64_t base = genie::instance_encrypt(dev, x);
            for (int bit = 0; bit < 64; ++bit) {
                int d = std::popcount(base ^ genie::instance_encrypt(dev, x ^ (uint64_t{1} << bit)));
                env.min = std::min(env.min, d);
                env.max = std::max(env.max, d);
                sum += d;
            }
        }
        env.mean = sum / (double(n_msgs) * 64.0);
        report.instances.push_back(env);
    }
    return report;
}

namespace {

// Union, over the whole single-bit-filtered census, of the nonzero cells of
// the difference-distribution and correlation tables. reach[a] is a 16-bit
// set of output values b some census box can produce from input value a.
struct CensusReach {
    std::array<uint16_t, 16> diff{};
    std::array<uint16_t, 16> lin{};
};

const CensusReach& census_reach() {
    static const CensusReach reach = [] {
        CensusReach r;
        for (const sbox::SBox4& s : sbox::optimal_single_bit_library()) {
            for (int a = 1; a < 16; ++a)
                for (int x = 0; x < 16; ++x) r.diff[a] |= uint16_t(1) << (s(uint8_t(x ^ a)) ^ s(x));
            sbox::LinTable lt = sbox::lin_table(s);
            for (int a = 1; a < 16; ++a)
                for (int b = 1; b < 16; ++b)
                    if (lt.entry[a][b]) r.lin[a] |= uint16_t(1) << b;
        }
        for (int a = 1; a < 16; ++a) r.diff[a] &= 0xFFFE;  // bijective: a!=0 never maps to 0
        return r;
    }();
    return reach;
}

// Boxes of the next round touched when box k emits the 4-bit value b.
int fanout(int k, int b) {
    const auto& p = bit_permutation();
    uint32_t boxes = 0;
    for (int t = 0; t < 4; ++t)
        if (b >> t & 1) boxes |= uint32_t(1) << (p[4 * k + t] / 4);
    return std::popcount(boxes);
}

ActiveSBoxSearch ni_search(Attack attack) {
    const CensusReach& reach = census_reach();
    const auto& table = attack == Attack::differential ? reach.diff : reach.lin;
    const char* unit = attack == Attack::differential ? "difference" : "mask";

    ActiveSBoxSearch out;
    out.claimed = 4;
    int best = 17, best_bit = -1, best_b = 0;
    for (int bit = 0; bit < 64; ++bit) {
        int k = bit / 4;
        int a = 1 << (bit % 4);
        for (int b = 1; b < 16; ++b) {
            if (!(table[a] >> b & 1)) continue;
            int total = 1 + fanout(k, b);
            if (total < best) best = total, best_bit = bit, best_b = b;
        }
    }
    out.minimum = best;
    out.witness =
        format("input bit %d: box %d %s %x -> output %s %x -> %d second-round boxes",
               best_bit, best_bit / 4, unit, 1 << (best_bit % 4), unit, best_b, best - 1);

    int ubest = 17, ua = 0, ub = 0;
    for (int a = 1; a < 16; ++a)
        for (int b = 1; b < 16; ++b) {
            if (!(table[a] >> b & 1)) continue;
            int spread = 4;
            for (int k = 0; k < 16; ++k) spread = std::min(spread, fanout(k, b));
            if (1 + spread < ubest) ubest = 1 + spread, ua = a, ub = b;
        }
    out.unrestricted_minimum = ubest;
    out.witness += format("; one-box %s %x -> %x gives %d", unit, ua, ub, ubest);
    return out;
}

// Exact two-layer minimum for the XOR-sum diffusion. A nibble activity
// pattern v maps to w, w_i = v_i ^ s with s the XOR of all v_i; the search
// minimises |{v_i != 0}| + |{v_i != s}| over all nonzero v, by dynamic
// programming on (running XOR, any-nonzero flag) for each target s.
int i_search_minimum() {
    constexpr int kInf = 1 << 20;
    int best = kInf;
    for (int s = 0; s < 16; ++s) {
        std::array<std::array<int, 2>, 16> dp;
        for (auto& row : dp) row = {kInf, kInf};
        dp[0][0] = 0;
        for (int pos = 0; pos < 16; ++pos) {
            std::array<std::array<int, 2>, 16> nx;
            for (auto& row : nx) row = {kInf, kInf};
            for (int x = 0; x < 16; ++x)
                for (int seen = 0; seen < 2; ++seen) {
                    if (dp[x][seen] >= kInf) continue;
                    for (int v = 0; v < 16; ++v) {
                        int cost;
                        if (s == 0)
                            cost = v == 0 ? 0 : 2;
                        else
                            cost = (v == 0 || v == s) ? 0 : 1;
                        int& slot = nx[x ^ v][seen | (v != 0)];
                        slot = std::min(slot, dp[x][seen] + cost);
                    }
                }
            dp = nx;
        }
        if (dp[s][1] < kInf) best = std::min(best, (s == 0 ? 0 : 16) + dp[s][1]);
    }
    return best;
}

}  // namespace

ActiveSBoxSearch min_active_sboxes(genie::CipherKind kind, Attack attack) {
    if (kind == genie::CipherKind::ni) return ni_search(attack);
    ActiveSBoxSearch out;
    out.minimum = i_search_minimum();
    out.claimed = attack == Attack::differential ? 4 : 2;
    out.witness = attack == Attack::differential
                      ? "two equal nonzero nibble differences cancel in the XOR sum, 2+2 boxes"
                      : "two equal nonzero nibble masks; the XOR-sum layer is self-transpose";
    return out;
}

int min_active_sboxes_instance(const NiSucSpec& spec, Attack attack) {
    int best = 17;
    for (int bit = 0; bit < 64; ++bit) {
        int k = bit / 4;
        int a = 1 << (bit % 4);
        const sbox::SBox4& s = spec.sboxes()[k];
        uint16_t options = 0;
        if (attack == Attack::differential) {
            for (int x = 0; x < 16; ++x) options |= uint16_t(1) << (s(uint8_t(x ^ a)) ^ s(x));
        } else {
            sbox::LinTable lt = sbox::lin_table(s);
            for (int b = 1; b < 16; ++b)
                if (lt.entry[a][b]) options |= uint16_t(1) << b;
        }
        for (int b = 1; b < 16; ++b)
            if (options >> b & 1) best = std::min(best, 1 + fanout(k, b));
    }
    return best;
}

bool verify_i_differential_witness(const ISucSpec& spec) {
    const auto& boxes = spec.sboxes();
    auto active_nibbles = [](uint64_t d) {
        int n = 0;
        for (int i = 0; i < 16; ++i) n += (d >> (4 * i) & 0xF) != 0;
        return n;
    };
    for (int c = 1; c < 16; ++c) {
        int x0 = -1, a = 0, x1 = -1, b = 0;
        for (int aa = 1; aa < 16 && x0 < 0; ++aa)
            for (int x = 0; x < 16; ++x)
                if ((boxes[0](uint8_t(x ^ aa)) ^ boxes[0](x)) == c) {
                    x0 = x, a = aa;
                    break;
                }
        for (int bb = 1; bb < 16 && x1 < 0; ++bb)
            for (int x = 0; x < 16; ++x)
                if ((boxes[1](uint8_t(x ^ bb)) ^ boxes[1](x)) == c) {
                    x1 = x, b = bb;
                    break;
                }
        if (x0 < 0 || x1 < 0) continue;
        uint64_t x = uint64_t(x0) | uint64_t(x1) << 4;
        uint64_t d = uint64_t(a) | uint64_t(b) << 4;
        uint64_t u = spec.substitution_layer(x);
        uint64_t v = spec.substitution_layer(x ^ d);
        uint64_t d1 = u ^ v;
        if (d1 != (uint64_t(c) | uint64_t(c) << 4)) continue;
        // Equal nibble pair: the folded sum is 0, so diffusion is a no-op on
        // the difference and the second layer sees the same two active boxes.
        if ((diffuse(u) ^ diffuse(v)) != d1) return false;
        uint64_t d2 = spec.substitution_layer(diffuse(u)) ^ spec.substitution_layer(diffuse(v));
        return active_nibbles(d1) + active_nibbles(d2) == 4;
    }
    return false;
}

DataComplexity data_complexity_bounds(int rounds) {
    if (rounds < 1) raise(Errc::invalid_spec, "round count must be positive");
    // One active box per round at best; squared bias 2^-4 and differential
    // probability 2^-2 per box both land on the same 4R exponent.
    return {4.0 * rounds, 4.0 * rounds};
}

BoundReport cardinalities(genie::CipherKind kind, int distinct_layers, int block_bits) {
    if (distinct_layers < 1) raise(Errc::invalid_spec, "distinct_layers must be positive");
    if (block_bits < 4 || block_bits % 4 != 0)
        raise(Errc::invalid_spec, "block_bits must be a positive multiple of 4");
    const bool ni = kind == genie::CipherKind::ni;
    const int boxes = block_bits / 4;
    BoundReport r;
    r.class_size_log2 = (ni ? kPerBoxLog2Ni : kPerBoxLog2I) * distinct_layers * boxes;
    r.key_entropy = ni ? 16.0 * block_bits : 16.0 * (block_bits - 4);
    r.cre_total = r.class_size_log2 + r.key_entropy;
    DataComplexity dc = data_complexity_bounds(30);
    r.n_l_log2 = dc.n_l_log2;
    r.n_d_log2 = dc.n_d_log2;
    r.grover_log2 = std::round(r.class_size_log2) / 2.0;
    r.ccbs_log2 = block_bits;
    return r;
}

PerfectBounds perfect_bounds(int block_bits) {
    if (block_bits < 1 || block_bits > 1023)
        raise(Errc::invalid_spec, "block_bits out of range");
    PerfectBounds pb;
    pb.s_max_log2_stirling = double(block_bits - 2) * std::ldexp(1.0, block_bits);
    pb.cre_max = pb.s_max_log2_stirling;
    if (block_bits <= 24) {
        // log2((2^n)!) via lgamma; exact to well below any quoted digit.
        long double words = std::ldexp(1.0L, block_bits);
        pb.s_max_log2_exact = double(lgammal(words + 1.0L) / logl(2.0L));
    }
    return pb;
}

ModelingBounds modeling_and_quantum(int block_bits, genie::CipherKind kind) {
    if (block_bits < 4 || block_bits % 4 != 0)
        raise(Errc::invalid_spec, "block_bits must be a positive multiple of 4");
    const bool ni = kind == genie::CipherKind::ni;
    ModelingBounds m;
    m.ccbs_log2 = block_bits;
    m.meets_classical = block_bits >= 80;
    m.meets_postquantum = block_bits >= 160;
    m.grover_log2 = std::round((ni ? kPerBoxLog2Ni : kPerBoxLog2I) * block_bits / 4.0) / 2.0;
    m.note = block_bits >= 80
                 ? "codebook capture meets the classical floor"
                 : "below the 2^80 codebook floor; still defensible where the "
                   "physical interface rate-limits bulk challenge collection";
    return m;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) raise(Errc::io_failure, "cannot write " + path.string());
}

std::string num(double v) { return format("%.10g", v); }

}  // namespace

void emit_csv(const AvalancheReport& report, const std::filesystem::path& path) {
    std::string text = "round,mean_distance,min_distance,max_distance\n";
    for (std::size_t r = 0; r < report.rounds.size(); ++r) {
        const RoundStats& s = report.rounds[r];
        text += format("%zu,%.4f,%d,%d\n", r + 1, s.mean, s.min, s.max);
    }
    write_file(path, text);
}

void emit_csv(const ClassAvalancheReport& report, const std::filesystem::path& path) {
    std::string text = "instance,min_distance,max_distance,mean_distance\n";
    for (std::size_t i = 0; i < report.instances.size(); ++i) {
        const InstanceEnvelope& e = report.instances[i];
        text += format("%zu,%d,%d,%.4f\n", i + 1, e.min, e.max, e.mean);
    }
    write_file(path, text);
}

std::string bounds_report_text() {
    std::string text;
    auto put = [&text](const std::string& key, const std::string& value) {
        text += key + "=" + value + "\n";
    };

    for (genie::CipherKind kind : {genie::CipherKind::ni, genie::CipherKind::i}) {
        const bool ni = kind == genie::CipherKind::ni;
        const std::string tag = ni ? "ni" : "i";
        BoundReport one = cardinalities(kind, 1);
        BoundReport all = cardinalities(kind, ni ? 31 : 16);
        put(tag + "_class_size_log2", num(one.class_size_log2));
        put(tag + "_key_entropy_bits", num(one.key_entropy));
        put(tag + "_cre_log2", num(one.cre_total));
        put(tag + "_cre_distinct_layers_log2", num(all.cre_total));
        put(tag + "_grover_log2", num(one.grover_log2));
        ModelingBounds m = modeling_and_quantum(64, kind);
        if (ni) {
            put("ccbs_log2", num(m.ccbs_log2));
            put("meets_classical_floor", m.meets_classical ? "1" : "0");
            put("meets_postquantum_floor", m.meets_postquantum ? "1" : "0");
        }
    }

    DataComplexity dc = data_complexity_bounds(30);
    put("n_l_log2_30_rounds", num(dc.n_l_log2));
    put("n_d_log2_30_rounds", num(dc.n_d_log2));

    PerfectBounds pb = perfect_bounds(10);
    put("s_max_log2_stirling_n10", num(pb.s_max_log2_stirling));
    put("s_max_log2_exact_n10", num(*pb.s_max_log2_exact));

    put("genie_storage_mbits_145920x64", num(genie::genie_storage_cost(145920, 64)));

    for (genie::CipherKind kind : {genie::CipherKind::i, genie::CipherKind::ni}) {
        const std::string tag = kind == genie::CipherKind::ni ? "ni" : "i";
        for (Attack attack : {Attack::differential, Attack::linear}) {
            const std::string name =
                tag + (attack == Attack::differential ? "_differential" : "_linear");
            ActiveSBoxSearch s = min_active_sboxes(kind, attack);
            put("active_boxes_" + name, std::to_string(s.minimum));
            put("active_boxes_" + name + "_claimed", std::to_string(s.claimed));
            if (s.unrestricted_minimum)
                put("active_boxes_" + name + "_unrestricted",
                    std::to_string(*s.unrestricted_minimum));
        }
    }
    return text;
}

}  // namespace suc::analysis
