#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <suc/genie.hpp>
#include <suc/trng.hpp>

namespace suc::analysis {

struct RoundStats {
    double mean = 0.0;
    int min = 64;
    int max = 0;
};

// Hamming-distance-by-round statistics under single-bit input flips,
// aggregated over freshly forged instances and random inputs. rounds[r] is
// the distance after substitution layer / round r+1.
struct AvalancheReport {
    genie::CipherKind kind = genie::CipherKind::ni;
    std::size_t instances = 0;
    std::size_t inputs = 0;
    std::vector<RoundStats> rounds;
};

// When control_no_flip is set the second input equals the first, so every
// distance is 0 (null experiment for the harness itself).
AvalancheReport avalanche_by_round(genie::CipherKind kind, std::size_t n_instances,
                                   std::size_t n_inputs, Trng& rng,
                                   bool control_no_flip = false);

// Final-state distance envelope of one instance over n_msgs random messages
// times all 64 single-bit flips.
struct InstanceEnvelope {
    int min = 64;
    int max = 0;
    double mean = 0.0;
};

struct ClassAvalancheReport {
    genie::CipherKind kind = genie::CipherKind::ni;
    std::size_t msgs_per_instance = 0;
    std::vector<InstanceEnvelope> instances;
};

ClassAvalancheReport class_avalanche(genie::CipherKind kind, std::size_t n_instances,
                                     std::size_t n_msgs, Trng& rng);

enum class Attack { differential, linear };

// Two-round minimum-active-S-box search. Involutive kind: exact propagation
// of nibble activity patterns through the XOR-sum layer (a 16x16-state
// dynamic program equivalent to sweeping all 16^16 patterns). Bit-permuted
// kind: truncated position-level propagation from the 64 single-bit input
// differences (masks), with the active box's output options limited to what
// some census box realizes; the same search over arbitrary starting values
// for one box is reported as unrestricted_minimum (multi-box starts cannot
// do better: each round keeps at least one active box).
struct ActiveSBoxSearch {
    int minimum = 0;       // computed by the model above
    int claimed = 0;       // the round-bound stated alongside the design
    std::optional<int> unrestricted_minimum;  // bit-permuted kind only
    std::string witness;
};

ActiveSBoxSearch min_active_sboxes(genie::CipherKind kind, Attack attack);

// Value-level confirmation on one concrete instance, single-bit starts.
int min_active_sboxes_instance(const NiSucSpec& spec, Attack attack);

// Confirms the involutive differential witness (two equal nonzero nibble
// differences cancel in the XOR sum) on a concrete instance by running a
// real plaintext pair through two substitution layers and the diffusion.
bool verify_i_differential_witness(const ISucSpec& spec);

// Distinguisher data-complexity floors in log2: both 4R (one active box per
// round, best bias 2^-2 / best differential probability 2^-2).
struct DataComplexity {
    double n_l_log2 = 0.0;
    double n_d_log2 = 0.0;
};

DataComplexity data_complexity_bounds(int rounds);

// Named log2 quantities for one cipher kind.
struct BoundReport {
    double class_size_log2 = 0.0;  // substitution-layer choices
    double key_entropy = 0.0;      // free key-LUT bits
    double cre_total = 0.0;        // class_size_log2 + key_entropy
    double n_l_log2 = 0.0;
    double n_d_log2 = 0.0;
    double grover_log2 = 0.0;
    double ccbs_log2 = 0.0;
};

// Documented per-box selection entropies (the figures the storage and class
// arithmetic is quoted with).
inline constexpr double kPerBoxLog2Ni = 20.4;
inline constexpr double kPerBoxLog2I = 17.15;

// class_size_log2 = per-box log2 x distinct_layers x block_bits/4.
// key_entropy scales with the block: one 16-bit LUT per state bit, minus the
// derived nibble for the involutive kind.
BoundReport cardinalities(genie::CipherKind kind, int distinct_layers,
                          int block_bits = 64);

// log2((2^n)!) exactly (n <= 24) and by the (n-2)*2^n approximation.
struct PerfectBounds {
    std::optional<double> s_max_log2_exact;
    double s_max_log2_stirling = 0.0;
    double cre_max = 0.0;
};

PerfectBounds perfect_bounds(int block_bits);

struct ModelingBounds {
    double ccbs_log2 = 0.0;
    bool meets_classical = false;     // 2^80 codebook floor
    bool meets_postquantum = false;   // 2^160 codebook floor
    double grover_log2 = 0.0;
    std::string note;
};

ModelingBounds modeling_and_quantum(int block_bits, genie::CipherKind kind);

// CSV emission, stable byte-for-byte for equal reports.
void emit_csv(const AvalancheReport& report, const std::filesystem::path& path);
void emit_csv(const ClassAvalancheReport& report, const std::filesystem::path& path);

// Machine-readable key=value lines covering every calculator, both kinds.
std::string bounds_report_text();

}  // namespace suc::analysis
