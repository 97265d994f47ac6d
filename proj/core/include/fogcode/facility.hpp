#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "fogcode/rlnc.hpp"
#include "fogcode/wire.hpp"

namespace fogcode::facility {

/// Static configuration of one CAV's RLNC-Facility sublayer.
struct Config {
    std::size_t source_packets = 1;   // K
    std::size_t coded_packets = 1;    // N, emissions per source message
    gf::Field field = gf::Field(8);
    double cam_interval_s = 0.01;
    std::size_t frame_budget = wire::kMaxFrameBytes;
    std::uint32_t station_id = 0;
    std::uint32_t first_message_id = 0;  // ids count up from here
    wire::StationType station_type = wire::StationType::kMobile;
    std::uint8_t protocol_version = 1;
    std::vector<wire::Tlv> attributes;  // emitted in every frame
};

/// Position and heading sampled at emission time, already in wire units.
struct Position {
    std::int32_t latitude = 0;    // 0.1 microdegree
    std::int32_t longitude = 0;   // 0.1 microdegree
    std::int32_t elevation = 0;   // cm
    std::uint16_t heading = 0;    // 0.1 degree
};

/// Largest L such that the serialized frame (fixed fields, declared TLVs,
/// ceil(L*m/8) payload bytes) fits the frame budget. Throws
/// std::invalid_argument when not even one symbol fits.
std::size_t derive_payload_length(const Config& config);

/// Deterministic per-packet coding seed. j is the 1-based emission index
/// within the message; a zero result is remapped to the xorshift seed
/// constant so the PRNG state stays nonzero.
std::uint32_t derive_seed(std::uint32_t station_id, std::uint32_t message_id, std::uint32_t j);

/// One emission: the frame plus its 1-based index within the message
/// schedule (simulation bookkeeping, not part of the wire format).
struct Emission {
    wire::RlncCam cam;
    std::uint32_t emission_index = 0;
};

/// Sensor-stream state machine. push() buffers bytes and forms a
/// Generation whenever a full K*L block is available; tick() emits the
/// schedule of N coded packets per message, one frame per CAM interval.
///
/// Single writer: push/flush/tick must be externally serialized.
class CamStream {
public:
    explicit CamStream(Config config);

    const Config& config() const { return config_; }
    std::size_t payload_symbols() const { return payload_symbols_; }  // L

    /// Bytes a single generation carries.
    std::size_t generation_bytes() const { return generation_bytes_; }

    void push(std::span<const std::byte> data);

    /// Queue the buffered remainder as a final zero-padded generation.
    void flush();

    /// True when a tick would emit a frame.
    bool busy() const { return active_.has_value() || !queue_.empty(); }

    std::size_t queued_generations() const { return queue_.size() + (active_ ? 1 : 0); }
    std::uint32_t next_message_id() const { return next_message_id_; }

    /// Emit the next scheduled RLNC-CAM, or nullopt when idle. Call at the
    /// CAM-interval cadence.
    std::optional<Emission> tick(std::uint64_t now_ms, const Position& position);

private:
    Config config_;
    std::size_t payload_symbols_;
    std::size_t generation_bytes_;
    std::deque<std::byte> buffer_;
    std::deque<rlnc::Generation> queue_;
    std::optional<rlnc::Generation> active_;
    std::uint32_t next_emission_ = 1;  // j, 1-based
    std::uint32_t next_message_id_ = 0;
    std::uint32_t next_cam_id_ = 0;
};

}  // namespace fogcode::facility
