// Microbenchmarks for the hot paths: field arithmetic, encode, decoder
// ingest, and wire framing. Sizes mirror the simulator defaults
// (frame_budget 48 gives L = 4 over GF(256); the CAM payload column uses a
// larger L to expose the per-symbol cost).

#include <benchmark/benchmark.h>

#include <cstddef>
#include <random>
#include <vector>

#include "fogcode/gf.hpp"
#include "fogcode/rlnc.hpp"
#include "fogcode/wire.hpp"

using namespace fogcode;

namespace {

std::vector<gf::Symbol> random_symbols(std::size_t count, unsigned order, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<unsigned> dist(0, order - 1);
    std::vector<gf::Symbol> out(count);
    for (auto& s : out) {
        s = static_cast<gf::Symbol>(dist(rng));
    }
    return out;
}

rlnc::Generation make_generation(std::size_t k, std::size_t l) {
    rlnc::Generation gen{.message_id = 1,
                         .packet_count = k,
                         .packet_symbols = l,
                         .payload_bytes = k * l,
                         .field = gf::Field(8),
                         .packets = {}};
    for (std::size_t i = 0; i < k; ++i) {
        gen.packets.push_back(random_symbols(l, 256, i + 1));
    }
    return gen;
}

void BM_GfMul(benchmark::State& state) {
    const gf::Field field(static_cast<unsigned>(state.range(0)));
    const auto a = random_symbols(4096, field.order(), 11);
    const auto b = random_symbols(4096, field.order(), 13);
    for (auto _ : state) {
        gf::Symbol acc = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            acc ^= field.mul(a[i], b[i]);
        }
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.size()));
}
BENCHMARK(BM_GfMul)->Arg(1)->Arg(4)->Arg(8);

void BM_GfInv(benchmark::State& state) {
    const gf::Field field(8);
    for (auto _ : state) {
        gf::Symbol acc = 0;
        for (unsigned v = 1; v < 256; ++v) {
            acc ^= field.inv(static_cast<gf::Symbol>(v));
        }
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * 255);
}
BENCHMARK(BM_GfInv);

void BM_Encode(benchmark::State& state) {
    const auto gen = make_generation(static_cast<std::size_t>(state.range(0)), 128);
    std::uint32_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rlnc::encode(gen, seed++));
    }
    state.SetBytesProcessed(state.iterations() * 128);
}
BENCHMARK(BM_Encode)->Arg(5)->Arg(10)->Arg(15);

void BM_DecoderIngest(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const auto gen = make_generation(k, 4);
    std::vector<rlnc::CodedPacket> packets;
    for (std::uint32_t j = 1; j <= k + 4; ++j) {
        packets.push_back(rlnc::encode(gen, j));
    }
    for (auto _ : state) {
        rlnc::Decoder decoder(gen.message_id, k, gen.packet_symbols, gen.field);
        for (const auto& pkt : packets) {
            decoder.ingest(pkt);
            if (decoder.complete()) {
                break;
            }
        }
        benchmark::DoNotOptimize(decoder.rank());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DecoderIngest)->Arg(5)->Arg(10)->Arg(15);

wire::RlncCam bench_cam() {
    wire::RlncCam cam;
    cam.protocol_version = 2;
    cam.cam_id = 0xDEAD;
    cam.generation_time_ms = 1700000000000ull;
    cam.station_id = 7;
    cam.station_type = wire::StationType::kMobile;
    cam.latitude = 514545000;
    cam.longitude = -25879000;
    cam.elevation = 1100;
    cam.heading = 900;
    cam.optional_attributes.push_back({0x10, std::vector<std::byte>(16, std::byte{0xAB})});
    cam.source_message_id = 42;
    cam.field_size_code = 7;
    cam.coding_seed = 0xC0FFEE;
    cam.coded_payload.assign(512, std::byte{0x5A});
    return cam;
}

void BM_WireSerialize(benchmark::State& state) {
    const auto cam = bench_cam();
    for (auto _ : state) {
        benchmark::DoNotOptimize(wire::serialize(cam));
    }
    state.SetBytesProcessed(state.iterations() *
                            static_cast<std::int64_t>(wire::serialized_size(cam)));
}
BENCHMARK(BM_WireSerialize);

void BM_WireParse(benchmark::State& state) {
    const auto bytes = wire::serialize(bench_cam());
    for (auto _ : state) {
        benchmark::DoNotOptimize(wire::parse(bytes));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_WireParse);

}  // namespace

BENCHMARK_MAIN();
