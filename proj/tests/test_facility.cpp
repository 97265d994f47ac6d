#include "fogcode/facility.hpp"

#include <doctest.h>

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

using namespace fogcode;

namespace {

facility::Config small_config() {
    facility::Config cfg;
    cfg.source_packets = 2;
    cfg.coded_packets = 5;
    cfg.frame_budget = 54;  // 10 payload bytes -> L = 10 over GF(256)
    cfg.station_id = 7;
    cfg.station_type = wire::StationType::kMobile;
    return cfg;
}

std::vector<std::byte> pattern_bytes(std::size_t count, unsigned start) {
    std::vector<std::byte> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::byte((start + i) & 0xFF);
    }
    return out;
}

}  // namespace

TEST_SUITE("facility") {

TEST_CASE("payload length fills the frame budget") {
    facility::Config cfg;
    cfg.frame_budget = 2048;
    CHECK_EQ(facility::derive_payload_length(cfg), 2004u);

    cfg.field = gf::Field(1);
    CHECK_EQ(facility::derive_payload_length(cfg), 16032u);

    cfg.field = gf::Field(8);
    cfg.frame_budget = 45;
    CHECK_EQ(facility::derive_payload_length(cfg), 1u);

    cfg.frame_budget = 44;
    CHECK_THROWS_AS(facility::derive_payload_length(cfg), std::invalid_argument);

    cfg.field = gf::Field(3);
    cfg.frame_budget = 45;  // one payload byte holds two 3-bit symbols
    CHECK_EQ(facility::derive_payload_length(cfg), 2u);
}

TEST_CASE("declared attributes shrink the payload room") {
    facility::Config cfg;
    cfg.attributes = {{0x07, {std::byte{0xDE}, std::byte{0xAD}}}};  // 5 bytes on the wire
    cfg.frame_budget = 50;
    CHECK_EQ(facility::derive_payload_length(cfg), 1u);
    cfg.frame_budget = 49;
    CHECK_THROWS_AS(facility::derive_payload_length(cfg), std::invalid_argument);
}

TEST_CASE("seed derivation is frozen and collision-free per message") {
    CHECK_EQ(facility::derive_seed(0, 0, 1), 0xC2B2AE35u);
    CHECK_EQ(facility::derive_seed(0, 0, 0), rlnc::Xorshift32::kSeedRemap);
    CHECK_EQ(facility::derive_seed(7, 3, 2), 0x6AAD0F82u);

    std::set<std::uint32_t> seen;
    for (std::uint32_t j = 1; j <= 200; ++j) {
        CHECK(seen.insert(facility::derive_seed(7, 3, j)).second);
    }
}

TEST_CASE("stream constructor validates its configuration") {
    auto cfg = small_config();
    cfg.source_packets = 0;
    CHECK_THROWS_AS(facility::CamStream{cfg}, std::invalid_argument);
    cfg = small_config();
    cfg.coded_packets = 1;  // below K
    CHECK_THROWS_AS(facility::CamStream{cfg}, std::invalid_argument);
    cfg = small_config();
    cfg.cam_interval_s = 0.0;
    CHECK_THROWS_AS(facility::CamStream{cfg}, std::invalid_argument);
    cfg = small_config();
    cfg.frame_budget = 44;
    CHECK_THROWS_AS(facility::CamStream{cfg}, std::invalid_argument);
}

TEST_CASE("push forms generations at block boundaries") {
    facility::CamStream stream(small_config());
    CHECK_EQ(stream.payload_symbols(), 10u);
    CHECK_EQ(stream.generation_bytes(), 20u);
    CHECK_FALSE(stream.busy());

    stream.push(pattern_bytes(19, 0));
    CHECK_EQ(stream.queued_generations(), 0u);
    stream.push(pattern_bytes(1, 19));
    CHECK_EQ(stream.queued_generations(), 1u);
    CHECK(stream.busy());

    stream.push(pattern_bytes(10, 20));
    CHECK_EQ(stream.queued_generations(), 1u);  // remainder stays buffered
    stream.flush();
    CHECK_EQ(stream.queued_generations(), 2u);
    CHECK_EQ(stream.next_message_id(), 2u);

    stream.flush();  // idempotent on an empty buffer
    CHECK_EQ(stream.queued_generations(), 2u);
}

TEST_CASE("tick emits the full schedule then goes idle") {
    const auto cfg = small_config();
    facility::CamStream stream(cfg);
    const auto data = pattern_bytes(20, 0);
    stream.push(data);

    facility::Position pos{.latitude = 514545000, .longitude = -25879000,
                           .elevation = 800, .heading = 900};
    rlnc::Decoder dec(0, cfg.source_packets, 10, cfg.field);
    for (std::uint32_t j = 1; j <= 5; ++j) {
        auto emission = stream.tick(1000 + j, pos);
        REQUIRE(emission.has_value());
        CHECK_EQ(emission->emission_index, j);
        const wire::RlncCam& cam = emission->cam;
        CHECK_EQ(cam.protocol_version, cfg.protocol_version);
        CHECK_EQ(cam.cam_id, j - 1);
        CHECK_EQ(cam.generation_time_ms, 1000 + j);
        CHECK_EQ(cam.station_id, 7u);
        CHECK_EQ(cam.latitude, pos.latitude);
        CHECK_EQ(cam.longitude, pos.longitude);
        CHECK_EQ(cam.elevation, pos.elevation);
        CHECK_EQ(cam.heading, pos.heading);
        CHECK_EQ(cam.source_message_id, 0u);
        CHECK_EQ(cam.field_size_code, 7);
        CHECK_EQ(cam.coding_seed, facility::derive_seed(7, 0, j));
        CHECK_EQ(cam.coded_payload.size(), 10u);

        dec.ingest(rlnc::CodedPacket{
            .message_id = cam.source_message_id,
            .seed = cam.coding_seed,
            .payload = rlnc::unpack_symbols(cam.coded_payload, 8, 10)});
    }
    REQUIRE(dec.complete());
    CHECK(*dec.recover_bytes(data.size()) == data);

    CHECK_FALSE(stream.busy());
    CHECK_FALSE(stream.tick(2000, pos).has_value());
}

TEST_CASE("a flushed remainder is zero-padded and recoverable") {
    const auto cfg = small_config();
    facility::CamStream stream(cfg);
    const auto data = pattern_bytes(13, 100);
    stream.push(data);
    stream.flush();

    rlnc::Decoder dec(0, cfg.source_packets, 10, cfg.field);
    while (stream.busy()) {
        auto emission = stream.tick(0, {});
        dec.ingest(rlnc::CodedPacket{
            .message_id = emission->cam.source_message_id,
            .seed = emission->cam.coding_seed,
            .payload = rlnc::unpack_symbols(emission->cam.coded_payload, 8, 10)});
    }
    REQUIRE(dec.complete());
    CHECK(*dec.recover_bytes(data.size()) == data);
}

TEST_CASE("message ids count up from the configured origin") {
    auto cfg = small_config();
    cfg.first_message_id = 0x9E3779B1u;
    facility::CamStream stream(cfg);
    stream.push(pattern_bytes(40, 0));
    CHECK_EQ(stream.next_message_id(), 0x9E3779B1u + 2);

    auto emission = stream.tick(0, {});
    REQUIRE(emission.has_value());
    CHECK_EQ(emission->cam.source_message_id, 0x9E3779B1u);
    CHECK_EQ(emission->cam.coding_seed, facility::derive_seed(7, 0x9E3779B1u, 1));
}

TEST_CASE("emitted frames serialize within the budget") {
    auto cfg = small_config();
    cfg.attributes = {{0x01, {std::byte{0xAA}}}};
    cfg.frame_budget = 60;
    facility::CamStream stream(cfg);
    stream.push(pattern_bytes(stream.generation_bytes(), 0));
    auto emission = stream.tick(0, {});
    REQUIRE(emission.has_value());
    CHECK_EQ(emission->cam.optional_attributes, cfg.attributes);
    CHECK_EQ(wire::serialize(emission->cam).size(), cfg.frame_budget);
}

}  // TEST_SUITE("facility")
