#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fogcode::wire {

/// Nature of the transmitting station.
enum class StationType : std::uint8_t {
    kMobile = 0,
    kPublicAuthority = 1,
    kPrivate = 2,
    kRsu = 3,
    kOther = 4,
};

/// Optional CAM attribute: opaque type/value pair.
struct Tlv {
    std::uint8_t type = 0;
    std::vector<std::byte> value;  // at most 65535 bytes

    bool operator==(const Tlv&) const = default;
};

/// The full over-the-air RLNC-CAM: standard CAM header/body fields followed
/// by the four RLNC fields. See the wire-format table in the README for the
/// normative byte layout (big-endian, fixed widths).
struct RlncCam {
    std::uint8_t protocol_version = 0;
    std::uint32_t cam_id = 0;
    std::uint64_t generation_time_ms = 0;  // Unix milliseconds
    std::uint32_t station_id = 0;
    StationType station_type = StationType::kMobile;
    std::int32_t latitude = 0;    // 0.1 microdegree units
    std::int32_t longitude = 0;   // 0.1 microdegree units
    std::int32_t elevation = 0;   // centimeters
    std::uint16_t heading = 0;    // 0.1 degree units, [0, 3599]
    std::vector<Tlv> optional_attributes;  // at most 255 entries
    std::uint32_t source_message_id = 0;
    std::uint8_t field_size_code = 0;  // log2(q) - 1, at most 7
    std::uint32_t coding_seed = 0;
    std::vector<std::byte> coded_payload;

    bool operator==(const RlncCam&) const = default;
};

inline constexpr std::int32_t kMaxLatitude = 900'000'000;
inline constexpr std::int32_t kMaxLongitude = 1'800'000'000;
inline constexpr std::uint16_t kMaxHeading = 3599;
inline constexpr std::uint8_t kMaxFieldSizeCode = 7;
inline constexpr std::size_t kMaxFrameBytes = 2048;

/// Serialized size of a message with no optional attributes and an empty
/// payload: every fixed field width summed.
inline constexpr std::size_t kFixedOverheadBytes = 44;

/// Serialization rejected an invalid field value or an oversized frame.
class SerializeError : public std::runtime_error {
public:
    SerializeError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Structured parse failure: what went wrong and where.
class ParseError : public std::runtime_error {
public:
    enum class Kind { kTruncated, kRange, kTrailingBytes, kOversized };

    ParseError(Kind kind, std::size_t offset, const std::string& message)
        : std::runtime_error(message + " (at byte " + std::to_string(offset) + ")"),
          kind_(kind),
          offset_(offset) {}

    Kind kind() const { return kind_; }
    std::size_t offset() const { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

std::size_t serialized_size(const RlncCam& msg);

/// Emits the fields in declaration order, big-endian. Equal messages
/// serialize to equal bytes. Throws SerializeError naming the offending
/// field when an invariant does not hold or the frame exceeds
/// kMaxFrameBytes.
std::vector<std::byte> serialize(const RlncCam& msg);

/// Total on arbitrary input: returns a valid RlncCam or throws ParseError.
/// Trailing bytes after the payload are an error. Never allocates more
/// than the input size.
RlncCam parse(std::span<const std::byte> bytes);

}  // namespace fogcode::wire
