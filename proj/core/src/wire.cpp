#include "fogcode/wire.hpp"

#include <cstring>

namespace fogcode::wire {

namespace {

constexpr std::size_t kTlvHeaderBytes = 3;  // type u8 + length u16

class Writer {
public:
    explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

    void u8(std::uint8_t v) { out_.push_back(std::byte{v}); }

    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v >> 8));
        u8(static_cast<std::uint8_t>(v));
    }

    void u32(std::uint32_t v) {
        u16(static_cast<std::uint16_t>(v >> 16));
        u16(static_cast<std::uint16_t>(v));
    }

    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v >> 32));
        u32(static_cast<std::uint32_t>(v));
    }

    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

    void bytes(std::span<const std::byte> b) {
        out_.insert(out_.end(), b.begin(), b.end());
    }

    std::vector<std::byte> take() { return std::move(out_); }

private:
    std::vector<std::byte> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint8_t u8(const char* field) {
        need(1, field);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint16_t u16(const char* field) {
        need(2, field);
        std::uint16_t v = static_cast<std::uint16_t>(
            (static_cast<unsigned>(bytes_[pos_]) << 8) |
            static_cast<unsigned>(bytes_[pos_ + 1]));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(const char* field) {
        std::uint32_t hi = u16(field);
        return (hi << 16) | u16(field);
    }

    std::uint64_t u64(const char* field) {
        std::uint64_t hi = u32(field);
        return (hi << 32) | u32(field);
    }

    std::int32_t i32(const char* field) { return static_cast<std::int32_t>(u32(field)); }

    std::vector<std::byte> bytes(std::size_t n, const char* field) {
        need(n, field);
        std::vector<std::byte> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                   bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

private:
    void need(std::size_t n, const char* field) {
        if (remaining() < n) {
            throw ParseError(ParseError::Kind::kTruncated, pos_,
                             std::string("truncated input while reading ") + field);
        }
    }

    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

void validate(const RlncCam& msg) {
    if (msg.latitude > kMaxLatitude || msg.latitude < -kMaxLatitude) {
        throw SerializeError("latitude", "latitude out of range");
    }
    if (msg.longitude > kMaxLongitude || msg.longitude < -kMaxLongitude) {
        throw SerializeError("longitude", "longitude out of range");
    }
    if (msg.heading > kMaxHeading) {
        throw SerializeError("heading", "heading out of range");
    }
    if (static_cast<std::uint8_t>(msg.station_type) >
        static_cast<std::uint8_t>(StationType::kOther)) {
        throw SerializeError("station_type", "unknown station type");
    }
    if (msg.field_size_code > kMaxFieldSizeCode) {
        throw SerializeError("field_size_code", "field size code exceeds 7");
    }
    if (msg.optional_attributes.size() > 255) {
        throw SerializeError("optional_attributes", "more than 255 TLVs");
    }
    for (const Tlv& tlv : msg.optional_attributes) {
        if (tlv.value.size() > 0xFFFF) {
            throw SerializeError("optional_attributes", "TLV value exceeds 65535 bytes");
        }
    }
    if (msg.coded_payload.size() > 0xFFFF) {
        throw SerializeError("coded_payload", "payload exceeds 65535 bytes");
    }
    if (serialized_size(msg) > kMaxFrameBytes) {
        throw SerializeError("total_length", "serialized frame exceeds 2048 bytes");
    }
}

}  // namespace

std::size_t serialized_size(const RlncCam& msg) {
    std::size_t n = kFixedOverheadBytes + msg.coded_payload.size();
    for (const Tlv& tlv : msg.optional_attributes) {
        n += kTlvHeaderBytes + tlv.value.size();
    }
    return n;
}

std::vector<std::byte> serialize(const RlncCam& msg) {
    validate(msg);
    Writer w(serialized_size(msg));
    w.u8(msg.protocol_version);
    w.u32(msg.cam_id);
    w.u64(msg.generation_time_ms);
    w.u32(msg.station_id);
    w.u8(static_cast<std::uint8_t>(msg.station_type));
    w.i32(msg.latitude);
    w.i32(msg.longitude);
    w.i32(msg.elevation);
    w.u16(msg.heading);
    w.u8(static_cast<std::uint8_t>(msg.optional_attributes.size()));
    for (const Tlv& tlv : msg.optional_attributes) {
        w.u8(tlv.type);
        w.u16(static_cast<std::uint16_t>(tlv.value.size()));
        w.bytes(tlv.value);
    }
    w.u32(msg.source_message_id);
    w.u8(msg.field_size_code);
    w.u32(msg.coding_seed);
    w.u16(static_cast<std::uint16_t>(msg.coded_payload.size()));
    w.bytes(msg.coded_payload);
    return w.take();
}

RlncCam parse(std::span<const std::byte> bytes) {
    if (bytes.size() > kMaxFrameBytes) {
        throw ParseError(ParseError::Kind::kOversized, 0,
                         "input exceeds the 2048-byte frame limit");
    }
    Reader r(bytes);
    RlncCam msg;
    msg.protocol_version = r.u8("protocol_version");
    msg.cam_id = r.u32("cam_id");
    msg.generation_time_ms = r.u64("generation_timestamp");
    msg.station_id = r.u32("station_id");

    const std::size_t type_off = r.offset();
    const std::uint8_t type_raw = r.u8("station_type");
    if (type_raw > static_cast<std::uint8_t>(StationType::kOther)) {
        throw ParseError(ParseError::Kind::kRange, type_off,
                         "station_type value " + std::to_string(type_raw) + " out of range");
    }
    msg.station_type = static_cast<StationType>(type_raw);

    const std::size_t lat_off = r.offset();
    msg.latitude = r.i32("latitude");
    if (msg.latitude > kMaxLatitude || msg.latitude < -kMaxLatitude) {
        throw ParseError(ParseError::Kind::kRange, lat_off, "latitude out of range");
    }
    const std::size_t lon_off = r.offset();
    msg.longitude = r.i32("longitude");
    if (msg.longitude > kMaxLongitude || msg.longitude < -kMaxLongitude) {
        throw ParseError(ParseError::Kind::kRange, lon_off, "longitude out of range");
    }
    msg.elevation = r.i32("elevation");

    const std::size_t heading_off = r.offset();
    msg.heading = r.u16("heading");
    if (msg.heading > kMaxHeading) {
        throw ParseError(ParseError::Kind::kRange, heading_off,
                         "heading value " + std::to_string(msg.heading) + " out of range");
    }

    const std::uint8_t tlv_count = r.u8("tlv_count");
    msg.optional_attributes.reserve(tlv_count);
    for (unsigned i = 0; i < tlv_count; ++i) {
        Tlv tlv;
        tlv.type = r.u8("tlv_type");
        const std::uint16_t len = r.u16("tlv_length");
        tlv.value = r.bytes(len, "tlv_value");
        msg.optional_attributes.push_back(std::move(tlv));
    }

    msg.source_message_id = r.u32("source_message_id");
    const std::size_t fsc_off = r.offset();
    msg.field_size_code = r.u8("field_size_code");
    if (msg.field_size_code > kMaxFieldSizeCode) {
        throw ParseError(ParseError::Kind::kRange, fsc_off,
                         "field_size_code " + std::to_string(msg.field_size_code) +
                             " exceeds 7");
    }
    msg.coding_seed = r.u32("coding_seed");
    const std::uint16_t payload_len = r.u16("payload_length");
    msg.coded_payload = r.bytes(payload_len, "coded_payload");

    if (r.remaining() != 0) {
        throw ParseError(ParseError::Kind::kTrailingBytes, r.offset(),
                         std::to_string(r.remaining()) + " trailing bytes after payload");
    }
    return msg;
}

}  // namespace fogcode::wire
