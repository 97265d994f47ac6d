// fogcode: RLNC encode/decode, analytic recovery curves, and the fog
// offloading simulator behind one binary. See README for the file formats.

#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fogcode/facility.hpp"
#include "fogcode/fogsim.hpp"
#include "fogcode/gf.hpp"
#include "fogcode/rlnc.hpp"
#include "fogcode/scenario.hpp"
#include "fogcode/wire.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::byte> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> bytes(raw.size());
    std::transform(raw.begin(), raw.end(), bytes.begin(),
                   [](char c) { return static_cast<std::byte>(c); });
    return bytes;
}

// Temp-and-rename so failures never leave a partial file behind.
void write_file_atomic(const fs::path& path, std::span<const std::byte> bytes) {
    const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

unsigned degree_of_order(unsigned q) {
    if (!std::has_single_bit(q) || q < 2 || q > 256) {
        throw CLI::ValidationError("--q", "field order must be a power of two in [2, 256]");
    }
    return static_cast<unsigned>(std::countr_zero(q));
}

std::string frame_name(std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06llu.bin", static_cast<unsigned long long>(index));
    return buf;
}

int run_encode(const fs::path& input, unsigned k, unsigned n, unsigned q,
               std::size_t frame_budget, std::uint32_t station_id, const fs::path& output) {
    const auto data = read_file(input);

    fogcode::facility::Config cfg;
    cfg.source_packets = k;
    cfg.coded_packets = n;
    cfg.field = fogcode::gf::Field(degree_of_order(q));
    cfg.frame_budget = frame_budget;
    cfg.station_id = station_id;
    fogcode::facility::CamStream stream(cfg);

    fs::create_directories(output);
    stream.push(data);
    stream.flush();

    json messages = json::array();
    std::uint64_t frames = 0;
    std::uint32_t current_message = 0;
    json seeds = json::array();
    const fogcode::facility::Position origin{};
    while (stream.busy()) {
        const auto emission = stream.tick(frames * 10, origin);
        if (!emission) break;
        const auto& cam = emission->cam;
        if (emission->emission_index == 1) {
            if (!seeds.empty()) {
                messages.push_back({{"id", current_message}, {"seeds", seeds}});
                seeds = json::array();
            }
            current_message = cam.source_message_id;
        }
        seeds.push_back(cam.coding_seed);
        const auto bytes = fogcode::wire::serialize(cam);
        write_file_atomic(output / frame_name(++frames), bytes);
    }
    if (!seeds.empty()) {
        messages.push_back({{"id", current_message}, {"seeds", seeds}});
    }

    // Original byte count per message; the last message may be a padded tail.
    const std::size_t gen_bytes = stream.generation_bytes();
    std::size_t remaining = data.size();
    for (auto& m : messages) {
        m["payload_bytes"] = std::min(gen_bytes, remaining);
        remaining -= std::min(gen_bytes, remaining);
    }

    json manifest{
        {"station_id", station_id},
        {"k", k},
        {"n", n},
        {"q", q},
        {"poly", cfg.field.poly()},
        {"l", stream.payload_symbols()},
        {"frame_budget", frame_budget},
        {"generation_bytes", gen_bytes},
        {"input_bytes", data.size()},
        {"frame_count", frames},
        {"messages", messages},
    };
    write_text_atomic(output / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote " << frames << " frames, " << messages.size() << " messages to "
              << output.string() << "\n";
    return 0;
}

int run_decode(const fs::path& frames_dir, const fs::path& output) {
    const fs::path manifest_path = frames_dir / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) throw std::runtime_error("cannot open " + manifest_path.string());
    json manifest = json::parse(mf);

    const auto station_id = manifest.at("station_id").get<std::uint32_t>();
    const auto k = manifest.at("k").get<unsigned>();
    const auto l = manifest.at("l").get<std::size_t>();
    const auto q = manifest.at("q").get<unsigned>();
    const unsigned degree = degree_of_order(q);
    const fogcode::gf::Field field =
        manifest.contains("poly")
            ? fogcode::gf::Field(degree, manifest.at("poly").get<unsigned>())
            : fogcode::gf::Field(degree);

    fogcode::fogsim::FogOrchestrator fo;
    fo.register_station(station_id, {k, l, field});

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".bin") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::uint32_t index = 0;
    for (const auto& f : files) {
        fo.ingest_frame(read_file(f), 0.0, ++index);
    }
    if (fo.malformed_frames() > 0) {
        std::cerr << "warning: " << fo.malformed_frames() << " malformed frame(s) dropped\n";
    }

    struct Entry {
        std::uint32_t id;
        std::size_t payload_bytes;
    };
    std::vector<Entry> order;
    for (const auto& m : manifest.at("messages")) {
        order.push_back({m.at("id").get<std::uint32_t>(), m.at("payload_bytes").get<std::size_t>()});
    }
    std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });

    std::vector<std::byte> recovered;
    bool all_recovered = true;
    for (const auto& e : order) {
        const auto* dec = fo.decoder(station_id, e.id);
        const std::size_t rank = dec ? dec->rank() : 0;
        std::optional<std::vector<std::byte>> bytes;
        if (dec && dec->complete()) bytes = dec->recover_bytes(e.payload_bytes);
        if (!bytes) {
            std::cerr << "message " << e.id << ": rank " << rank << " of " << k << "\n";
            all_recovered = false;
            continue;
        }
        recovered.insert(recovered.end(), bytes->begin(), bytes->end());
    }

    if (!all_recovered) {
        std::cerr << "decode failed: unrecovered messages, no output written\n";
        return 1;
    }
    write_file_atomic(output, recovered);
    std::cout << "recovered " << order.size() << " message(s), " << recovered.size()
              << " bytes to " << output.string() << "\n";
    return 0;
}

int run_analytic(unsigned k, unsigned q, double per, unsigned n_max) {
    degree_of_order(q);
    std::printf("n,recovery_probability,delivery_curve\n");
    for (unsigned n = 0; n <= n_max; ++n) {
        std::printf("%u,%.9f,%.9f\n", n, fogcode::rlnc::recovery_probability(n, k, q),
                    fogcode::rlnc::delivery_curve(n, per, k, q));
    }
    return 0;
}

int run_simulate(const fs::path& scenario_path, const fs::path& out_dir, std::uint32_t trials,
                 bool seed_set, std::uint64_t seed, double epsilon, unsigned threads) {
    auto sc = fogcode::scenario::load_scenario(scenario_path);
    if (seed_set) sc.rng_seed = seed;

    fogcode::fogsim::SweepConfig cfg;
    cfg.trials = trials;
    cfg.epsilon = epsilon;
    cfg.threads = threads;
    const auto report = fogcode::fogsim::run_monte_carlo(sc, cfg);
    fogcode::fogsim::emit_report(report, out_dir);

    std::printf("trials=%u epsilon=%g avg_per=%.4f\n", report.trials, report.epsilon,
                report.average_per);
    std::printf("%-8s %-6s %-6s %s\n", "curve", "K", "q", "N*");
    for (const auto& c : report.curves) {
        const unsigned n_star = c.n_star(report.epsilon, report.schedule_max);
        if (n_star > 0) {
            std::printf("%-8s %-6u %-6u %u\n", c.label.c_str(), c.packet_count, c.field_order,
                        n_star);
        } else {
            std::printf("%-8s %-6u %-6u -\n", c.label.c_str(), c.packet_count, c.field_order);
        }
    }
    std::printf("frames emitted=%llu delivered=%llu duplicates=%llu malformed=%llu\n",
                static_cast<unsigned long long>(report.frames_emitted),
                static_cast<unsigned long long>(report.frames_delivered),
                static_cast<unsigned long long>(report.duplicate_frames),
                static_cast<unsigned long long>(report.malformed_frames));
    std::printf("messages completed=%llu recovered=%llu payload_mismatches=%llu\n",
                static_cast<unsigned long long>(report.messages_completed),
                static_cast<unsigned long long>(report.messages_recovered),
                static_cast<unsigned long long>(report.payload_mismatches));
    return 0;
}

int run_validate(const fs::path& scenario_path) {
    const auto sc = fogcode::scenario::load_scenario(scenario_path);
    std::cout << "OK: " << sc.rsus.size() << " RSU(s), " << sc.vehicles.size()
              << " vehicle(s), duration " << sc.duration_s << " s, trials " << sc.trials << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generation-based RLNC coding and a fog data-offloading simulator"};
    app.require_subcommand(1);

    auto* encode = app.add_subcommand("encode", "Encode a file into RLNC-CAM frame files");
    fs::path enc_input;
    fs::path enc_output;
    unsigned enc_k = 5;
    unsigned enc_n = 0;
    unsigned enc_q = 256;
    unsigned enc_budget = fogcode::wire::kMaxFrameBytes;
    std::uint32_t enc_station = 0;
    encode->add_option("--input", enc_input, "Input byte stream")->required();
    encode->add_option("--output", enc_output, "Output directory")->required();
    encode->add_option("--k", enc_k, "Source packets per generation")->check(CLI::Range(1u, 1024u));
    encode->add_option("--n", enc_n, "Coded packets per generation (default K)");
    encode->add_option("--q", enc_q, "Field order, power of two in [2, 256]");
    encode->add_option("--frame-budget", enc_budget, "Frame size cap in bytes")
        ->check(CLI::Range(static_cast<unsigned>(fogcode::wire::kFixedOverheadBytes + 1),
                           static_cast<unsigned>(fogcode::wire::kMaxFrameBytes)));
    encode->add_option("--station-id", enc_station, "Transmitting station id");

    auto* decode = app.add_subcommand("decode", "Recover the byte stream from frame files");
    fs::path dec_frames;
    fs::path dec_output;
    decode->add_option("--frames", dec_frames, "Directory with frames and manifest.json")
        ->required();
    decode->add_option("--output", dec_output, "Recovered output file")->required();

    auto* analytic = app.add_subcommand("analytic", "Print recovery and delivery curves as CSV");
    unsigned ana_k = 5;
    unsigned ana_q = 256;
    double ana_per = 0.0;
    unsigned ana_n_max = 100;
    analytic->add_option("--k", ana_k, "Source packets per generation")
        ->check(CLI::Range(1u, 1024u));
    analytic->add_option("--q", ana_q, "Field order, power of two in [2, 256]");
    analytic->add_option("--per", ana_per, "Packet error rate")->check(CLI::Range(0.0, 1.0));
    analytic->add_option("--n-max", ana_n_max, "Last transmission count row")
        ->check(CLI::Range(0u, 1000000u));

    auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo sweep on a scenario");
    fs::path sim_scenario;
    fs::path sim_out;
    std::uint32_t sim_trials = 0;
    std::uint64_t sim_seed = 0;
    double sim_epsilon = 0.0;
    unsigned sim_threads = 1;
    simulate->add_option("--scenario", sim_scenario, "Scenario file")->required();
    simulate->add_option("--out", sim_out, "Report output directory")->required();
    simulate->add_option("--trials", sim_trials, "Override scenario trial count");
    auto* seed_opt = simulate->add_option("--seed", sim_seed, "Override scenario RNG seed");
    simulate->add_option("--epsilon", sim_epsilon, "Override N* threshold")
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--threads", sim_threads, "Worker threads for trials")
        ->check(CLI::Range(1u, 256u));

    auto* validate = app.add_subcommand("validate-scenario", "Parse and validate a scenario file");
    fs::path val_scenario;
    validate->add_option("--scenario", val_scenario, "Scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (encode->parsed()) {
            return run_encode(enc_input, enc_k, enc_n == 0 ? enc_k : enc_n, enc_q, enc_budget,
                              enc_station, enc_output);
        }
        if (decode->parsed()) return run_decode(dec_frames, dec_output);
        if (analytic->parsed()) return run_analytic(ana_k, ana_q, ana_per, ana_n_max);
        if (simulate->parsed()) {
            return run_simulate(sim_scenario, sim_out, sim_trials, !seed_opt->empty(), sim_seed,
                                sim_epsilon, sim_threads);
        }
        if (validate->parsed()) return run_validate(val_scenario);
    } catch (const fogcode::scenario::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
