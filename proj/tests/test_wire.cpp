#include "fogcode/wire.hpp"

#include <doctest.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

using namespace fogcode;

namespace {

wire::RlncCam golden_cam() {
    wire::RlncCam cam;
    cam.protocol_version = 1;
    cam.cam_id = 0x01020304;
    cam.generation_time_ms = 0x0102030405060708ull;
    cam.station_id = 0xAABBCCDD;
    cam.station_type = wire::StationType::kRsu;
    cam.latitude = -1;
    cam.longitude = wire::kMaxLongitude;
    cam.elevation = 256;
    cam.heading = wire::kMaxHeading;
    cam.optional_attributes = {{0x07, {std::byte{0xDE}, std::byte{0xAD}}}};
    cam.source_message_id = 5;
    cam.field_size_code = 7;
    cam.coding_seed = 0x9E3779B9;
    cam.coded_payload = {std::byte{0x42}};
    return cam;
}

const std::vector<std::byte>& golden_bytes() {
    static const std::vector<std::byte> bytes = [] {
        const unsigned raw[] = {
            0x01,                                            // protocol_version
            0x01, 0x02, 0x03, 0x04,                          // cam_id
            0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08,  // generation_time_ms
            0xAA, 0xBB, 0xCC, 0xDD,                          // station_id
            0x03,                                            // station_type
            0xFF, 0xFF, 0xFF, 0xFF,                          // latitude = -1
            0x6B, 0x49, 0xD2, 0x00,                          // longitude = 1.8e9
            0x00, 0x00, 0x01, 0x00,                          // elevation = 256
            0x0E, 0x0F,                                      // heading = 3599
            0x01,                                            // TLV count
            0x07, 0x00, 0x02, 0xDE, 0xAD,                    // TLV {7, [DE AD]}
            0x00, 0x00, 0x00, 0x05,                          // source_message_id
            0x07,                                            // field_size_code
            0x9E, 0x37, 0x79, 0xB9,                          // coding_seed
            0x00, 0x01, 0x42,                                // payload
        };
        std::vector<std::byte> out;
        for (unsigned b : raw) {
            out.push_back(std::byte(b));
        }
        return out;
    }();
    return bytes;
}

wire::RlncCam random_cam(std::mt19937_64& rng) {
    auto u = [&rng](std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };
    wire::RlncCam cam;
    cam.protocol_version = std::uint8_t(u(0, 255));
    cam.cam_id = std::uint32_t(u(0, 0xFFFFFFFF));
    cam.generation_time_ms = rng();
    cam.station_id = std::uint32_t(u(0, 0xFFFFFFFF));
    cam.station_type = wire::StationType(u(0, 4));
    cam.latitude = std::int32_t(std::int64_t(u(0, 2 * 900'000'000ull)) - 900'000'000);
    cam.longitude = std::int32_t(std::int64_t(u(0, 2 * 1'800'000'000ull)) - 1'800'000'000);
    cam.elevation = std::int32_t(std::uint32_t(u(0, 0xFFFFFFFF)));
    cam.heading = std::uint16_t(u(0, 3599));
    const std::size_t tlv_count = u(0, 3);
    for (std::size_t i = 0; i < tlv_count; ++i) {
        wire::Tlv tlv;
        tlv.type = std::uint8_t(u(0, 255));
        tlv.value.resize(u(0, 40));
        for (auto& b : tlv.value) {
            b = std::byte(u(0, 255));
        }
        cam.optional_attributes.push_back(std::move(tlv));
    }
    cam.source_message_id = std::uint32_t(u(0, 0xFFFFFFFF));
    cam.field_size_code = std::uint8_t(u(0, 7));
    cam.coding_seed = std::uint32_t(u(0, 0xFFFFFFFF));
    cam.coded_payload.resize(u(0, 600));
    for (auto& b : cam.coded_payload) {
        b = std::byte(u(0, 255));
    }
    return cam;
}

}  // namespace

TEST_SUITE("wire") {

TEST_CASE("fixed overhead is the sum of the fixed field widths") {
    CHECK_EQ(wire::kFixedOverheadBytes, 44u);
    CHECK_EQ(wire::serialized_size(wire::RlncCam{}), 44u);
    CHECK_EQ(wire::serialize(wire::RlncCam{}).size(), 44u);
}

TEST_CASE("golden frame byte layout") {
    const auto cam = golden_cam();
    CHECK_EQ(wire::serialized_size(cam), 50u);
    CHECK(wire::serialize(cam) == golden_bytes());
    CHECK(wire::parse(golden_bytes()) == cam);
}

TEST_CASE("serialize/parse round-trips random messages") {
    std::mt19937_64 rng(0xC0FFEE);
    for (int i = 0; i < 500; ++i) {
        const auto cam = random_cam(rng);
        const auto bytes = wire::serialize(cam);
        CHECK_EQ(bytes.size(), wire::serialized_size(cam));
        CHECK(wire::parse(bytes) == cam);
    }
}

TEST_CASE("every strict prefix is truncated") {
    const auto& bytes = golden_bytes();
    for (std::size_t len = 0; len < bytes.size(); ++len) {
        const std::span<const std::byte> prefix(bytes.data(), len);
        CHECK_THROWS_WITH_AS(wire::parse(prefix), doctest::Contains("at byte"),
                             wire::ParseError);
        try {
            wire::parse(prefix);
        } catch (const wire::ParseError& e) {
            CHECK_EQ(e.kind(), wire::ParseError::Kind::kTruncated);
            CHECK_LE(e.offset(), len);
        }
    }
}

TEST_CASE("trailing bytes are rejected") {
    auto bytes = golden_bytes();
    bytes.push_back(std::byte{0x00});
    try {
        wire::parse(bytes);
        FAIL("expected ParseError");
    } catch (const wire::ParseError& e) {
        CHECK_EQ(e.kind(), wire::ParseError::Kind::kTrailingBytes);
        CHECK_EQ(e.offset(), golden_bytes().size());
    }
}

TEST_CASE("oversized input is rejected before field parsing") {
    std::vector<std::byte> bytes(wire::kMaxFrameBytes + 1);
    try {
        wire::parse(bytes);
        FAIL("expected ParseError");
    } catch (const wire::ParseError& e) {
        CHECK_EQ(e.kind(), wire::ParseError::Kind::kOversized);
        CHECK_EQ(e.offset(), 0u);
    }
}

TEST_CASE("parse range checks report the field offset") {
    auto expect_range_at = [](std::vector<std::byte> bytes, std::size_t offset) {
        try {
            wire::parse(bytes);
            FAIL("expected ParseError at offset " << offset);
        } catch (const wire::ParseError& e) {
            CHECK_EQ(e.kind(), wire::ParseError::Kind::kRange);
            CHECK_EQ(e.offset(), offset);
            CHECK(std::string(e.what()).find("at byte " + std::to_string(offset)) !=
                  std::string::npos);
        }
    };

    auto bytes = golden_bytes();
    bytes[17] = std::byte{5};  // station_type
    expect_range_at(bytes, 17);

    bytes = golden_bytes();
    bytes[18] = std::byte{0x7F};  // latitude 0x7FFFFFFF
    expect_range_at(bytes, 18);

    bytes = golden_bytes();
    bytes[22] = std::byte{0x7F};  // longitude too large
    expect_range_at(bytes, 22);

    bytes = golden_bytes();
    bytes[30] = std::byte{0xFF};  // heading 0xFF0F
    expect_range_at(bytes, 30);

    bytes = golden_bytes();
    bytes[42] = std::byte{8};  // field_size_code (after the 5-byte TLV)
    expect_range_at(bytes, 42);
}

TEST_CASE("serialize rejects out-of-range fields by name") {
    auto expect_field = [](const wire::RlncCam& cam, const std::string& field) {
        try {
            wire::serialize(cam);
            FAIL("expected SerializeError for " << field);
        } catch (const wire::SerializeError& e) {
            CHECK_EQ(e.field(), field);
        }
    };

    auto cam = golden_cam();
    cam.latitude = wire::kMaxLatitude + 1;
    expect_field(cam, "latitude");
    cam = golden_cam();
    cam.latitude = -wire::kMaxLatitude - 1;
    expect_field(cam, "latitude");

    cam = golden_cam();
    cam.longitude = wire::kMaxLongitude + 1;
    expect_field(cam, "longitude");

    cam = golden_cam();
    cam.heading = 3600;
    expect_field(cam, "heading");

    cam = golden_cam();
    cam.station_type = wire::StationType(5);
    expect_field(cam, "station_type");

    cam = golden_cam();
    cam.field_size_code = 8;
    expect_field(cam, "field_size_code");

    cam = golden_cam();
    cam.optional_attributes.assign(256, wire::Tlv{});
    expect_field(cam, "optional_attributes");

    cam = golden_cam();
    cam.optional_attributes = {{0, std::vector<std::byte>(65536)}};
    expect_field(cam, "optional_attributes");

    cam = golden_cam();
    cam.coded_payload.assign(65536, std::byte{0});
    expect_field(cam, "coded_payload");

    cam = golden_cam();
    cam.coded_payload.assign(wire::kMaxFrameBytes - 44 + 1, std::byte{0});
    expect_field(cam, "total_length");
}

TEST_CASE("frames at the size limit round-trip") {
    wire::RlncCam cam;
    cam.coded_payload.assign(wire::kMaxFrameBytes - wire::kFixedOverheadBytes,
                             std::byte{0xA5});
    const auto bytes = wire::serialize(cam);
    CHECK_EQ(bytes.size(), wire::kMaxFrameBytes);
    CHECK(wire::parse(bytes) == cam);
}

}  // TEST_SUITE("wire")
