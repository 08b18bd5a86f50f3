// suc: command-line front end for the secret-unknown-cipher toolkit.
// Exit codes: 0 success / identification accepted, 1 not accepted,
// 2 usage, 3 data or format problem, 4 network problem.
#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <suc/analysis.hpp>
#include <suc/cipher_i.hpp>
#include <suc/cipher_ni.hpp>
#include <suc/errors.hpp>
#include <suc/genie.hpp>
#include <suc/protocol.hpp>
#include <suc/sbox.hpp>
#include <suc/trng.hpp>

namespace {

using namespace suc;

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::channel_failure:
        case Errc::timeout:
        case Errc::bind_failure:
        case Errc::protocol_violation:
            return 4;
        default:
            return 3;
    }
}

struct RngFlags {
    std::string seed_hex;
    std::string entropy;
    uint64_t stream = 0;
};

void add_rng_flags(CLI::App* cmd, RngFlags& flags) {
    cmd->add_option("--seed", flags.seed_hex, "64 hex chars, deterministic generator seed");
    cmd->add_option("--entropy", flags.entropy, "'os' for non-deterministic seeding")
        ->check(CLI::IsMember({"os"}));
    cmd->add_option("--stream", flags.stream, "generator substream id");
}

Trng make_rng(const RngFlags& flags) {
    if (flags.entropy == "os") {
        if (!flags.seed_hex.empty())
            throw CLI::ValidationError("--seed and --entropy os are mutually exclusive");
        return Trng::os_seeded(flags.stream);
    }
    if (flags.seed_hex.empty())
        throw CLI::ValidationError("either --seed <64 hex> or --entropy os is required");
    return Trng::from_hex_seed(flags.seed_hex, flags.stream);
}

genie::CipherKind parse_kind(const std::string& kind) {
    return kind == "ni" ? genie::CipherKind::ni : genie::CipherKind::i;
}

std::pair<std::string, uint16_t> split_hostport(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("address must be host:port, got '" + addr + "'");
    std::string host = addr.substr(0, colon);
    if (host.empty()) host = "127.0.0.1";
    int port = 0;
    try {
        port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535)
        throw CLI::ValidationError("bad port in '" + addr + "'");
    return {host, uint16_t(port)};
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io_failure, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void print_ledger(const genie::EntropyLedger& ledger) {
    std::printf("selection_bits=%" PRIu64 "\n", ledger.selection_bits);
    std::printf("key_bits=%" PRIu64 "\n", ledger.key_bits);
    std::printf("overdraw_bits=%" PRIu64 "\n", ledger.overdraw_bits);
    std::printf("entropy_bytes=%" PRIu64 "\n", ledger.total_bytes());
}

const char* region_kind_name(genie::RegionKind kind) {
    switch (kind) {
        case genie::RegionKind::sbox_layer: return "sbox_layer";
        case genie::RegionKind::key_bank: return "key_bank";
        case genie::RegionKind::meta: return "meta";
    }
    return "unknown";
}

void print_session(const protocol::SessionEvent& ev) {
    if (ev.verdict)
        std::printf("sn=%" PRIu64 " verdict=%s\n", ev.sn, protocol::verdict_name(*ev.verdict));
    else
        std::printf("sn=%" PRIu64 " error=%s\n", ev.sn, ev.error.c_str());
    std::fflush(stdout);
}

int exit_for_verdict(protocol::Verdict verdict) {
    std::printf("verdict=%s\n", protocol::verdict_name(verdict));
    return verdict == protocol::Verdict::accepted ? 0 : 1;
}

// Runs the TA side against a bitstream loaded in this process, the unit
// answering over an in-process channel.
protocol::Verdict identify_local(protocol::UirStore& store, uint64_t sn,
                                 const genie::SucInstance& device, Trng& rng,
                                 const std::function<void()>& persist) {
    auto [ta_end, dev_end] = protocol::make_pipe_channel();
    std::thread unit([&device, sn, ch = std::move(dev_end)] {
        try {
            protocol::device_session(device, sn, *ch);
        } catch (const SucError&) {
            // TA-side verdict is authoritative; a torn-down channel here is
            // already reflected there.
        }
    });
    protocol::Verdict verdict;
    try {
        verdict = protocol::ta_session(store, *ta_end, rng, persist);
    } catch (...) {
        ta_end->close();
        unit.join();
        throw;
    }
    ta_end->close();
    unit.join();
    return verdict;
}

int run(int argc, char** argv) {
    CLI::App app{"secret-unknown-cipher toolkit"};
    app.require_subcommand(1);

    // forge
    auto* forge = app.add_subcommand("forge", "build a default (unpersonalized) template");
    std::string forge_kind, forge_out, forge_payload;
    forge->add_option("--kind", forge_kind)->check(CLI::IsMember({"ni", "i"}))->required();
    forge->add_option("--out", forge_out)->required();
    forge->add_option("--payload", forge_payload, "application image copied into the body");

    // personalize
    auto* pers = app.add_subcommand("personalize", "fill template regions from the generator");
    std::string pers_in, pers_out;
    RngFlags pers_rng;
    pers->add_option("--in", pers_in)->required();
    pers->add_option("--out", pers_out)->required();
    add_rng_flags(pers, pers_rng);

    // lock
    auto* lock_cmd = app.add_subcommand("lock", "set the one-way configuration lock");
    std::string lock_in, lock_out;
    lock_cmd->add_option("--in", lock_in)->required();
    lock_cmd->add_option("--out", lock_out)->required();

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print directory, kind and S-box health");
    std::string inspect_in;
    inspect->add_option("--in", inspect_in)->required();

    // enroll
    auto* enroll_cmd = app.add_subcommand("enroll", "record challenge pairs for one unit");
    std::string enroll_dev, enroll_uir;
    uint64_t enroll_sn = 0;
    std::size_t enroll_pairs = 0;
    RngFlags enroll_rng;
    enroll_cmd->add_option("--device", enroll_dev, "personalized bitstream")->required();
    enroll_cmd->add_option("--sn", enroll_sn)->required();
    enroll_cmd->add_option("--pairs", enroll_pairs)->required();
    enroll_cmd->add_option("--uir", enroll_uir, "record store (CSV)")->required();
    add_rng_flags(enroll_cmd, enroll_rng);

    // identify
    auto* ident = app.add_subcommand("identify", "run one identification as the TA");
    std::string ident_uir, ident_dev, ident_connect;
    std::optional<uint64_t> ident_sn;
    RngFlags ident_rng;
    ident->add_option("--uir", ident_uir)->required();
    ident->add_option("--sn", ident_sn, "serial to identify (required with --device)");
    ident->add_option("--device", ident_dev, "bitstream answered in-process");
    ident->add_option("--connect", ident_connect, "host:port of a listening unit");
    add_rng_flags(ident, ident_rng);

    // serve-ta
    auto* serve = app.add_subcommand("serve-ta", "accept units and identify each");
    std::string serve_uir, serve_listen;
    uint64_t serve_max = 0;
    RngFlags serve_rng;
    serve->add_option("--uir", serve_uir)->required();
    serve->add_option("--listen", serve_listen, "host:port (port 0 picks one)")->required();
    serve->add_option("--max-sessions", serve_max, "stop after this many sessions (0 = run on)");
    add_rng_flags(serve, serve_rng);

    // device
    auto* dev_cmd = app.add_subcommand("device", "act as a unit");
    std::string dev_bitstream, dev_connect, dev_listen;
    uint64_t dev_sn = 0, dev_max = 0;
    dev_cmd->add_option("--bitstream", dev_bitstream)->required();
    dev_cmd->add_option("--sn", dev_sn)->required();
    dev_cmd->add_option("--connect", dev_connect, "dial a TA at host:port");
    dev_cmd->add_option("--listen", dev_listen, "wait for the TA at host:port");
    dev_cmd->add_option("--max-sessions", dev_max);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "statistics and bound calculators");
    analyze->require_subcommand(1);

    auto* av = analyze->add_subcommand("avalanche", "per-round distances under 1-bit flips");
    std::string av_kind = "i", av_out;
    std::size_t av_instances = 10, av_inputs = 100;
    bool av_control = false;
    RngFlags av_rng;
    av->add_option("--kind", av_kind)->check(CLI::IsMember({"ni", "i"}));
    av->add_option("--instances", av_instances);
    av->add_option("--inputs", av_inputs);
    av->add_option("--out", av_out, "CSV path")->required();
    av->add_flag("--control", av_control, "no-flip null experiment");
    add_rng_flags(av, av_rng);

    auto* cl = analyze->add_subcommand("class", "per-instance final-distance envelopes");
    std::string cl_kind = "i", cl_out;
    std::size_t cl_instances = 100, cl_msgs = 10;
    RngFlags cl_rng;
    cl->add_option("--kind", cl_kind)->check(CLI::IsMember({"ni", "i"}));
    cl->add_option("--instances", cl_instances);
    cl->add_option("--msgs", cl_msgs);
    cl->add_option("--out", cl_out, "CSV path")->required();
    add_rng_flags(cl, cl_rng);

    auto* bounds = analyze->add_subcommand("bounds", "cardinality and complexity report");
    std::string bounds_out;
    bounds->add_option("--out", bounds_out, "also write the report here");

    auto* active = analyze->add_subcommand("active-sboxes", "2-round minimum active boxes");
    std::string act_kind = "i", act_attack = "differential";
    active->add_option("--kind", act_kind)->check(CLI::IsMember({"ni", "i"}));
    active->add_option("--attack", act_attack)
        ->check(CLI::IsMember({"differential", "linear"}));

    // sbox
    auto* sbox_cmd = app.add_subcommand("sbox", "census and single-table checks");
    sbox_cmd->require_subcommand(1);

    auto* enumerate = sbox_cmd->add_subcommand(
        "enumerate-involutive", "count the involutive optimal census");
    std::string enum_cache;
    enumerate->add_option("--cache", enum_cache, "census cache file to use or create");

    auto* sbox_check = sbox_cmd->add_subcommand("check", "properties of one 16-nibble table");
    std::string check_table;
    sbox_check->add_option("table", check_table, "16 hex digits, S(0)..S(15)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints help or the diagnostic
        return code == 0 ? 0 : 2;
    }

    if (*forge) {
        std::vector<uint8_t> payload;
        if (!forge_payload.empty()) payload = read_file(forge_payload);
        auto bs = genie::build_template(payload, parse_kind(forge_kind));
        genie::save_bitstream(forge_out, bs);
        std::printf("kind=%s\n", forge_kind.c_str());
        std::printf("body_bytes=%zu\n", bs.body.size());
        return 0;
    }

    if (*pers) {
        Trng rng = make_rng(pers_rng);
        auto bs = genie::load_bitstream(pers_in);
        auto [out, ledger] = genie::personalize(bs, rng);
        genie::save_bitstream(pers_out, out);
        print_ledger(ledger);
        return 0;
    }

    if (*lock_cmd) {
        genie::save_bitstream(lock_out, genie::lock(genie::load_bitstream(lock_in)));
        return 0;
    }

    if (*inspect) {
        auto bs = genie::load_bitstream(inspect_in);
        bool personalized = genie::is_personalized(bs);
        std::printf("kind=%s\n", genie::bitstream_kind(bs) == genie::CipherKind::ni ? "ni" : "i");
        std::printf("version=%u\n", unsigned(bs.version));
        std::printf("locked=%d\n", bs.locked ? 1 : 0);
        std::printf("personalized=%d\n", personalized ? 1 : 0);
        std::printf("body_bytes=%zu\n", bs.body.size());
        for (const auto& region : bs.directory)
            std::printf("region id=%u kind=%s offset=%u length=%u\n", unsigned(region.id),
                        region_kind_name(region.kind), unsigned(region.offset),
                        unsigned(region.length));
        if (personalized) {
            auto block = genie::region_bytes(bs, genie::RegionKind::sbox_layer);
            int optimal = 0, involutions = 0;
            for (int i = 0; i < 16; ++i) {
                auto s = sbox::from_lut_block(
                    std::span<const uint8_t>(block.data() + 8 * i, 8));
                optimal += sbox::is_optimal(s);
                involutions += sbox::is_involution(s);
            }
            std::printf("sboxes_optimal=%d/16\n", optimal);
            std::printf("sboxes_involutive=%d/16\n", involutions);
        }
        return 0;
    }

    if (*enroll_cmd) {
        Trng rng = make_rng(enroll_rng);
        auto device = genie::load_device(genie::load_bitstream(enroll_dev));
        protocol::UirStore store;
        if (std::filesystem::exists(enroll_uir)) store = protocol::uir_load(enroll_uir);
        store.put(protocol::enroll(device, enroll_sn, enroll_pairs, rng));
        protocol::uir_save(store, enroll_uir);
        std::printf("sn=%" PRIu64 "\n", enroll_sn);
        std::printf("pairs=%zu\n", enroll_pairs);
        return 0;
    }

    if (*ident) {
        if (ident_dev.empty() == ident_connect.empty())
            throw CLI::ValidationError("identify needs exactly one of --device / --connect");
        Trng rng = make_rng(ident_rng);
        auto store = protocol::uir_load(ident_uir);
        auto persist = [&store, &ident_uir] { protocol::uir_save(store, ident_uir); };
        if (!ident_dev.empty()) {
            if (!ident_sn) throw CLI::ValidationError("--device requires --sn");
            auto device = genie::load_device(genie::load_bitstream(ident_dev));
            return exit_for_verdict(identify_local(store, *ident_sn, device, rng, persist));
        }
        auto [host, port] = split_hostport(ident_connect);
        uint64_t sn = 0;
        auto verdict = protocol::identify_connect(store, host, port, rng, persist,
                                                  std::chrono::milliseconds{5000}, &sn);
        if (ident_sn && *ident_sn != sn)
            raise(Errc::unknown_serial, "unit announced sn " + std::to_string(sn));
        std::printf("sn=%" PRIu64 "\n", sn);
        return exit_for_verdict(verdict);
    }

    if (*serve) {
        Trng rng = make_rng(serve_rng);
        auto store = protocol::uir_load(serve_uir);
        auto persist = [&store, &serve_uir] { protocol::uir_save(store, serve_uir); };
        auto [host, port] = split_hostport(serve_listen);
        protocol::TcpListener listener(host, port);
        std::printf("listening=%s:%u\n", host.c_str(), unsigned(listener.port()));
        std::fflush(stdout);
        protocol::ServeOptions opts;
        opts.max_sessions = serve_max;
        uint64_t n = protocol::serve_ta(store, listener, rng, persist, opts, print_session);
        std::printf("sessions=%" PRIu64 "\n", n);
        return 0;
    }

    if (*dev_cmd) {
        if (dev_connect.empty() == dev_listen.empty())
            throw CLI::ValidationError("device needs exactly one of --connect / --listen");
        auto device = genie::load_device(genie::load_bitstream(dev_bitstream));
        if (!dev_connect.empty()) {
            auto [host, port] = split_hostport(dev_connect);
            return exit_for_verdict(protocol::connect_device(device, dev_sn, host, port));
        }
        auto [host, port] = split_hostport(dev_listen);
        protocol::TcpListener listener(host, port);
        std::printf("listening=%s:%u\n", host.c_str(), unsigned(listener.port()));
        std::fflush(stdout);
        protocol::ServeOptions opts;
        opts.max_sessions = dev_max;
        uint64_t n = protocol::serve_device(device, dev_sn, listener, opts, print_session);
        std::printf("sessions=%" PRIu64 "\n", n);
        return 0;
    }

    if (*av) {
        Trng rng = make_rng(av_rng);
        auto report = analysis::avalanche_by_round(parse_kind(av_kind), av_instances,
                                                   av_inputs, rng, av_control);
        analysis::emit_csv(report, av_out);
        std::printf("rounds=%zu\n", report.rounds.size());
        std::printf("final_mean=%.4f\n", report.rounds.back().mean);
        return 0;
    }

    if (*cl) {
        Trng rng = make_rng(cl_rng);
        auto report =
            analysis::class_avalanche(parse_kind(cl_kind), cl_instances, cl_msgs, rng);
        analysis::emit_csv(report, cl_out);
        double lo = 64.0, hi = 0.0;
        for (const auto& env : report.instances) {
            lo = std::min(lo, env.mean);
            hi = std::max(hi, env.mean);
        }
        std::printf("instances=%zu\n", report.instances.size());
        std::printf("mean_range=[%.4f,%.4f]\n", lo, hi);
        return 0;
    }

    if (*bounds) {
        std::string text = analysis::bounds_report_text();
        if (!bounds_out.empty()) {
            std::ofstream out(bounds_out, std::ios::binary);
            out << text;
            if (!out) raise(Errc::io_failure, "cannot write " + bounds_out);
        }
        std::fputs(text.c_str(), stdout);
        return 0;
    }

    if (*active) {
        auto search = analysis::min_active_sboxes(
            parse_kind(act_kind), act_attack == "linear" ? analysis::Attack::linear
                                                         : analysis::Attack::differential);
        std::printf("minimum=%d\n", search.minimum);
        std::printf("claimed=%d\n", search.claimed);
        if (search.unrestricted_minimum)
            std::printf("unrestricted_minimum=%d\n", *search.unrestricted_minimum);
        std::printf("witness=%s\n", search.witness.c_str());
        return 0;
    }

    if (*enumerate) {
        const auto& census = enum_cache.empty()
                                 ? sbox::involutive_optimal_library()
                                 : sbox::load_or_build_cache(enum_cache, true);
        std::size_t with_sbd = 0;
        for (const auto& s : census) with_sbd += sbox::has_single_bit_diffusion(s);
        std::printf("count=%zu\n", census.size());
        std::printf("single_bit_diffusion=%zu\n", with_sbd);
        std::printf("single_bit_diffusion_fraction=%.6f\n",
                    census.empty() ? 0.0 : double(with_sbd) / double(census.size()));
        return 0;
    }

    if (*sbox_check) {
        if (check_table.size() != 16)
            throw CLI::ValidationError("table must be exactly 16 hex digits");
        sbox::SBox4 s{};
        for (int i = 0; i < 16; ++i) {
            char c = check_table[i];
            int v = c >= '0' && c <= '9'   ? c - '0'
                    : c >= 'a' && c <= 'f' ? c - 'a' + 10
                    : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                           : -1;
            if (v < 0) throw CLI::ValidationError("table must be hex digits only");
            s.table[i] = uint8_t(v);
        }
        bool bij = sbox::is_bijection(s);
        std::printf("bijective=%d\n", bij ? 1 : 0);
        if (bij) {
            std::printf("involution=%d\n", sbox::is_involution(s) ? 1 : 0);
            std::printf("diff_uniformity=%d\n", sbox::diff_uniformity(sbox::diff_table(s)));
            std::printf("linearity=%d\n", sbox::linearity(sbox::lin_table(s)));
            std::printf("optimal=%d\n", sbox::is_optimal(s) ? 1 : 0);
            std::printf("single_bit_diffusion=%d\n",
                        sbox::has_single_bit_diffusion(s) ? 1 : 0);
        }
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const suc::SucError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
