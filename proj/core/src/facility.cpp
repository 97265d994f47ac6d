#include "fogcode/facility.hpp"

#include <stdexcept>
#include <string>

namespace fogcode::facility {

std::size_t derive_payload_length(const Config& config) {
    std::size_t overhead = wire::kFixedOverheadBytes;
    for (const wire::Tlv& tlv : config.attributes) {
        overhead += 3 + tlv.value.size();
    }
    if (config.frame_budget <= overhead) {
        throw std::invalid_argument(
            "facility: frame budget of " + std::to_string(config.frame_budget) +
            " bytes leaves no payload room (fixed overhead is " +
            std::to_string(overhead) + " bytes)");
    }
    const std::size_t payload_bytes = config.frame_budget - overhead;
    const std::size_t symbols = payload_bytes * 8 / config.field.degree();
    if (symbols == 0) {
        throw std::invalid_argument("facility: frame budget too small for one symbol");
    }
    return symbols;
}

std::uint32_t derive_seed(std::uint32_t station_id, std::uint32_t message_id,
                          std::uint32_t j) {
    const std::uint32_t seed =
        station_id * 0x9E3779B1u + message_id * 0x85EBCA6Bu + j * 0xC2B2AE35u;
    return seed == 0 ? rlnc::Xorshift32::kSeedRemap : seed;
}

CamStream::CamStream(Config config) : config_(std::move(config)), payload_symbols_(0), generation_bytes_(0) {
    if (config_.source_packets < 1) {
        throw std::invalid_argument("facility: K must be at least 1");
    }
    if (config_.coded_packets < config_.source_packets) {
        throw std::invalid_argument("facility: N must be at least K");
    }
    if (config_.cam_interval_s <= 0.0) {
        throw std::invalid_argument("facility: CAM interval must be positive");
    }
    payload_symbols_ = derive_payload_length(config_);
    generation_bytes_ = rlnc::generation_capacity_bytes(
        config_.source_packets, payload_symbols_, config_.field.degree());
    next_message_id_ = config_.first_message_id;
}

void CamStream::push(std::span<const std::byte> data) {
    buffer_.insert(buffer_.end(), data.begin(), data.end());
    while (buffer_.size() >= generation_bytes_) {
        std::vector<std::byte> block(buffer_.begin(),
                                     buffer_.begin() + static_cast<std::ptrdiff_t>(generation_bytes_));
        buffer_.erase(buffer_.begin(),
                      buffer_.begin() + static_cast<std::ptrdiff_t>(generation_bytes_));
        queue_.push_back(rlnc::segment(block, config_.source_packets, payload_symbols_,
                                       config_.field, next_message_id_++));
    }
}

void CamStream::flush() {
    if (buffer_.empty()) {
        return;
    }
    std::vector<std::byte> block(buffer_.begin(), buffer_.end());
    buffer_.clear();
    queue_.push_back(rlnc::segment(block, config_.source_packets, payload_symbols_,
                                   config_.field, next_message_id_++));
}

std::optional<Emission> CamStream::tick(std::uint64_t now_ms, const Position& position) {
    if (!active_) {
        if (queue_.empty()) {
            return std::nullopt;
        }
        active_ = std::move(queue_.front());
        queue_.pop_front();
        next_emission_ = 1;
    }

    const std::uint32_t j = next_emission_;
    const std::uint32_t seed = derive_seed(config_.station_id, active_->message_id, j);
    rlnc::CodedPacket coded = rlnc::encode(*active_, seed);

    wire::RlncCam cam;
    cam.protocol_version = config_.protocol_version;
    cam.cam_id = next_cam_id_++;
    cam.generation_time_ms = now_ms;
    cam.station_id = config_.station_id;
    cam.station_type = config_.station_type;
    cam.latitude = position.latitude;
    cam.longitude = position.longitude;
    cam.elevation = position.elevation;
    cam.heading = position.heading;
    cam.optional_attributes = config_.attributes;
    cam.source_message_id = coded.message_id;
    cam.field_size_code = static_cast<std::uint8_t>(config_.field.degree() - 1);
    cam.coding_seed = seed;
    cam.coded_payload = rlnc::pack_symbols(coded.payload, config_.field.degree());

    if (j >= config_.coded_packets) {
        active_.reset();  // schedule complete, next tick starts the next message
    } else {
        next_emission_ = j + 1;
    }
    return Emission{.cam = std::move(cam), .emission_index = j};
}

}  // namespace fogcode::facility
