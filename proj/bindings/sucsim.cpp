// Python face of the toolkit. Mirrors the CLI's operations so scripted
// experiments exercise the same code paths the binaries use: generator,
// template personalization, device loading, and the bound calculators.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include <suc/analysis.hpp>
#include <suc/errors.hpp>
#include <suc/genie.hpp>
#include <suc/sbox.hpp>
#include <suc/trng.hpp>

namespace py = pybind11;
using namespace suc;
using genie::CipherKind;

namespace {

CipherKind kind_from(const std::string& s) {
    if (s == "ni") return CipherKind::ni;
    if (s == "i") return CipherKind::i;
    throw py::value_error("kind must be 'ni' or 'i'");
}

const char* kind_name(CipherKind k) { return k == CipherKind::ni ? "ni" : "i"; }

// The cipher instance behind a personalized bitstream; encrypt/decrypt only,
// the way the enrollment and identification code sees it.
struct Device {
    genie::SucInstance inst;
};

py::dict ledger_dict(const genie::EntropyLedger& led) {
    py::dict d;
    d["selection_bits"] = led.selection_bits;
    d["key_bits"] = led.key_bits;
    d["overdraw_bits"] = led.overdraw_bits;
    d["entropy_bytes"] = led.total_bytes();
    return d;
}

sbox::SBox4 parse_table(const std::string& hex) {
    if (hex.size() != 16) throw py::value_error("table must be 16 hex digits");
    sbox::SBox4 s{};
    for (int i = 0; i < 16; ++i) {
        char c = hex[i];
        int v = c >= '0' && c <= '9'   ? c - '0'
                : c >= 'a' && c <= 'f' ? c - 'a' + 10
                : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                       : -1;
        if (v < 0) throw py::value_error("table must be 16 hex digits");
        s.table[i] = uint8_t(v);
    }
    return s;
}

}  // namespace

PYBIND11_MODULE(sucsim, m) {
    m.doc() = "secret unknown cipher toolkit: seeded generator, template "
              "personalization, cipher instances, bound calculators";

    py::register_exception<SucError>(m, "Error");

    py::class_<Trng>(m, "Trng")
        .def(py::init([](const std::string& seed_hex, uint64_t stream) {
                 return Trng::from_hex_seed(seed_hex, stream);
             }),
             py::arg("seed_hex"), py::arg("stream") = 0,
             "Deterministic generator from a 64-hex-digit seed.")
        .def_static("os_seeded", &Trng::os_seeded, py::arg("stream") = 0)
        .def("draw_bits", &Trng::draw_bits, py::arg("n"))
        .def("uniform_below", &Trng::uniform_below, py::arg("bound"))
        .def_property_readonly("bits_consumed", &Trng::bits_consumed)
        .def_property_readonly("stream", &Trng::stream_id);

    py::class_<genie::VirtualBitstream>(m, "Bitstream")
        .def_property_readonly("locked",
                               [](const genie::VirtualBitstream& b) { return b.locked; })
        .def_property_readonly("personalized", &genie::is_personalized)
        .def_property_readonly(
            "kind",
            [](const genie::VirtualBitstream& b) {
                return std::string(kind_name(genie::bitstream_kind(b)));
            })
        .def_property_readonly("body_bytes",
                               [](const genie::VirtualBitstream& b) {
                                   return b.body.size();
                               })
        .def_property_readonly("regions",
                               [](const genie::VirtualBitstream& b) {
                                   py::list out;
                                   for (const genie::Region& r : b.directory) {
                                       py::dict d;
                                       d["id"] = r.id;
                                       d["kind"] = r.kind == genie::RegionKind::sbox_layer
                                                       ? "sbox_layer"
                                                   : r.kind == genie::RegionKind::key_bank
                                                       ? "key_bank"
                                                       : "meta";
                                       d["offset"] = r.offset;
                                       d["length"] = r.length;
                                       out.append(d);
                                   }
                                   return out;
                               })
        .def("to_bytes", [](const genie::VirtualBitstream& b) {
            std::vector<uint8_t> raw = genie::to_bytes(b);
            return py::bytes(reinterpret_cast<const char*>(raw.data()), raw.size());
        });

    py::class_<Device>(m, "Device")
        .def("encrypt",
             [](const Device& d, uint64_t x) { return genie::instance_encrypt(d.inst, x); },
             py::arg("x"))
        .def("decrypt",
             [](const Device& d, uint64_t y) { return genie::instance_decrypt(d.inst, y); },
             py::arg("y"))
        .def_property_readonly("kind", [](const Device& d) {
            return std::string(kind_name(genie::instance_kind(d.inst)));
        });

    m.def(
        "build_template",
        [](const std::string& kind, const py::bytes& payload) {
            std::string raw = payload;
            return genie::build_template(
                {reinterpret_cast<const uint8_t*>(raw.data()), raw.size()},
                kind_from(kind));
        },
        py::arg("kind"), py::arg("payload") = py::bytes());

    m.def(
        "personalize",
        [](const genie::VirtualBitstream& bs, Trng& rng) {
            auto [out, ledger] = genie::personalize(bs, rng);
            return py::make_tuple(out, ledger_dict(ledger));
        },
        py::arg("bitstream"), py::arg("rng"),
        "Fill the template regions; returns (bitstream, entropy ledger).");

    m.def("lock", &genie::lock, py::arg("bitstream"));
    m.def(
        "load_device",
        [](const genie::VirtualBitstream& bs) { return Device{genie::load_device(bs)}; },
        py::arg("bitstream"));
    m.def(
        "forge_instance",
        [](const std::string& kind, Trng& rng) {
            return Device{genie::forge_instance(kind_from(kind), rng)};
        },
        py::arg("kind"), py::arg("rng"),
        "Template -> personalize -> load in one step.");

    m.def(
        "save_bitstream",
        [](const std::string& path, const genie::VirtualBitstream& bs) {
            genie::save_bitstream(path, bs);
        },
        py::arg("path"), py::arg("bitstream"));
    m.def(
        "load_bitstream",
        [](const std::string& path) { return genie::load_bitstream(path); },
        py::arg("path"));
    m.def(
        "from_bytes",
        [](const py::bytes& raw) {
            std::string s = raw;
            return genie::from_bytes(
                {reinterpret_cast<const uint8_t*>(s.data()), s.size()});
        },
        py::arg("raw"));

    m.def("genie_storage_cost", &genie::genie_storage_cost, py::arg("set_size"),
          py::arg("bits_per_entry"));

    m.def(
        "sbox_check",
        [](const std::string& table) {
            sbox::SBox4 s = parse_table(table);
            py::dict d;
            bool bij = sbox::is_bijection(s);
            d["bijective"] = bij;
            if (bij) {
                d["involution"] = sbox::is_involution(s);
                d["diff_uniformity"] = sbox::diff_uniformity(sbox::diff_table(s));
                d["linearity"] = sbox::linearity(sbox::lin_table(s));
                d["optimal"] = sbox::is_optimal(s);
                d["single_bit_diffusion"] = sbox::has_single_bit_diffusion(s);
            }
            return d;
        },
        py::arg("table"), "Properties of one 16-hex-digit S-box table.");

    m.def(
        "data_complexity_bounds",
        [](int rounds) {
            analysis::DataComplexity dc = analysis::data_complexity_bounds(rounds);
            return py::make_tuple(dc.n_l_log2, dc.n_d_log2);
        },
        py::arg("rounds"));

    m.def(
        "cardinalities",
        [](const std::string& kind, int distinct_layers, int block_bits) {
            analysis::BoundReport r =
                analysis::cardinalities(kind_from(kind), distinct_layers, block_bits);
            py::dict d;
            d["class_size_log2"] = r.class_size_log2;
            d["key_entropy"] = r.key_entropy;
            d["cre_total"] = r.cre_total;
            d["n_l_log2"] = r.n_l_log2;
            d["n_d_log2"] = r.n_d_log2;
            d["grover_log2"] = r.grover_log2;
            d["ccbs_log2"] = r.ccbs_log2;
            return d;
        },
        py::arg("kind"), py::arg("distinct_layers") = 1, py::arg("block_bits") = 64);

    m.def(
        "perfect_bounds",
        [](int block_bits) {
            analysis::PerfectBounds pb = analysis::perfect_bounds(block_bits);
            py::dict d;
            d["s_max_log2_exact"] = pb.s_max_log2_exact
                                        ? py::object(py::float_(*pb.s_max_log2_exact))
                                        : py::object(py::none());
            d["s_max_log2_stirling"] = pb.s_max_log2_stirling;
            d["cre_max"] = pb.cre_max;
            return d;
        },
        py::arg("block_bits"));

    m.def(
        "modeling_and_quantum",
        [](int block_bits, const std::string& kind) {
            analysis::ModelingBounds mb =
                analysis::modeling_and_quantum(block_bits, kind_from(kind));
            py::dict d;
            d["ccbs_log2"] = mb.ccbs_log2;
            d["meets_classical"] = mb.meets_classical;
            d["meets_postquantum"] = mb.meets_postquantum;
            d["grover_log2"] = mb.grover_log2;
            d["note"] = mb.note;
            return d;
        },
        py::arg("block_bits"), py::arg("kind"));

    m.def(
        "avalanche_by_round",
        [](const std::string& kind, std::size_t instances, std::size_t inputs,
           Trng& rng, bool control) {
            analysis::AvalancheReport rep = analysis::avalanche_by_round(
                kind_from(kind), instances, inputs, rng, control);
            py::list rounds;
            for (const analysis::RoundStats& s : rep.rounds)
                rounds.append(py::make_tuple(s.mean, s.min, s.max));
            return rounds;
        },
        py::arg("kind"), py::arg("instances"), py::arg("inputs"), py::arg("rng"),
        py::arg("control") = false,
        "Per-round (mean, min, max) Hamming distances under single-bit flips.");

    m.def(
        "min_active_sboxes",
        [](const std::string& kind, const std::string& attack) {
            analysis::Attack a;
            if (attack == "differential")
                a = analysis::Attack::differential;
            else if (attack == "linear")
                a = analysis::Attack::linear;
            else
                throw py::value_error("attack must be 'differential' or 'linear'");
            analysis::ActiveSBoxSearch s = analysis::min_active_sboxes(kind_from(kind), a);
            py::dict d;
            d["minimum"] = s.minimum;
            d["claimed"] = s.claimed;
            d["unrestricted_minimum"] =
                s.unrestricted_minimum ? py::object(py::int_(*s.unrestricted_minimum))
                                       : py::object(py::none());
            d["witness"] = s.witness;
            return d;
        },
        py::arg("kind"), py::arg("attack"));

    m.def("bounds_report_text", &analysis::bounds_report_text,
          "key=value lines covering every calculator, both kinds.");
}
