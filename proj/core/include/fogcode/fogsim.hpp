#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fogcode/channel.hpp"
#include "fogcode/facility.hpp"
#include "fogcode/rlnc.hpp"
#include "fogcode/scenario.hpp"
#include "fogcode/wire.hpp"

namespace fogcode::fogsim {

/// Decode parameters a fog orchestrator needs per transmitting station;
/// the wire format does not carry K or L.
struct RlncParams {
    unsigned source_packets;  // K
    std::size_t packet_symbols;  // L
    gf::Field field;
};

struct RecoveryEvent {
    std::uint32_t station_id = 0;
    std::uint32_t message_id = 0;
    double time_s = 0.0;
    std::uint32_t emission_index = 0;  // j of the frame that completed rank K
};

/// Decoder rank after a forwarded (non-duplicate) frame.
struct RankStep {
    std::uint32_t station_id = 0;
    std::uint32_t message_id = 0;
    unsigned rank = 0;

    bool operator==(const RankStep&) const = default;
};

struct IngestOutcome {
    enum class Status : std::uint8_t {
        kMalformed,       // parse or payload-shape failure, counted and dropped
        kUnknownStation,  // no registered RlncParams
        kDuplicate,       // dedup key already seen
        kForwarded,       // reached the decoder
    };
    Status status = Status::kMalformed;
    std::uint32_t station_id = 0;
    std::uint32_t message_id = 0;
    unsigned rank = 0;      // decoder rank after the frame (kForwarded only)
    bool recovered = false;  // this frame completed rank K
};

/// Per-fog-area collector: deduplicates frames arriving via multiple RSUs
/// on (station, message, seed) and feeds one decoder per (station, message).
/// Malformed input is counted, never fatal.
class FogOrchestrator {
public:
    void register_station(std::uint32_t station_id, const RlncParams& params);

    IngestOutcome ingest_frame(std::span<const std::byte> frame, double time_s,
                               std::uint32_t emission_index);
    IngestOutcome ingest(const wire::RlncCam& cam, double time_s, std::uint32_t emission_index);

    /// Decoder for (station, message), or nullptr before its first frame.
    const rlnc::Decoder* decoder(std::uint32_t station_id, std::uint32_t message_id) const;

    const std::vector<RecoveryEvent>& recoveries() const { return recoveries_; }

    std::uint64_t delivered_frames() const { return delivered_; }
    std::uint64_t malformed_frames() const { return malformed_; }
    std::uint64_t unknown_station_frames() const { return unknown_station_; }
    std::uint64_t duplicate_frames() const { return duplicates_; }
    std::uint64_t forwarded_frames() const { return forwarded_; }

    void enable_rank_log(bool on) { rank_log_enabled_ = on; }
    const std::vector<RankStep>& rank_log() const { return rank_log_; }

private:
    struct DedupKey {
        std::uint32_t station_id;
        std::uint32_t message_id;
        std::uint32_t seed;

        bool operator==(const DedupKey&) const = default;
    };
    struct DedupHash {
        std::size_t operator()(const DedupKey& k) const;
    };

    static std::uint64_t decoder_key(std::uint32_t station_id, std::uint32_t message_id) {
        return (static_cast<std::uint64_t>(station_id) << 32) | message_id;
    }

    std::unordered_map<std::uint32_t, RlncParams> stations_;
    std::unordered_set<DedupKey, DedupHash> seen_;
    std::unordered_map<std::uint64_t, rlnc::Decoder> decoders_;
    std::vector<RecoveryEvent> recoveries_;
    std::uint64_t delivered_ = 0;
    std::uint64_t malformed_ = 0;
    std::uint64_t unknown_station_ = 0;
    std::uint64_t duplicates_ = 0;
    std::uint64_t forwarded_ = 0;
    bool rank_log_enabled_ = false;
    std::vector<RankStep> rank_log_;
};

/// Width of the PER-by-distance report bins.
inline constexpr double kDistanceBinM = 10.0;

/// Flat-earth geographic anchor for local (x, y) meters; Bristol city centre.
inline constexpr double kAnchorLatitudeDeg = 51.4545;
inline constexpr double kAnchorLongitudeDeg = -2.5879;

struct WorldOptions {
    unsigned packet_count = 0;         // override each vehicle's K (0 keeps the spec)
    unsigned schedule = 0;             // override each vehicle's N
    std::optional<gf::Field> field;    // override each vehicle's field
    std::uint64_t rng_seed = 0;
    std::uint32_t first_message_id = 0;
    bool per_rsu_decoders = false;     // track a virtual decoder per RSU
    bool rank_log = false;
};

/// Outcome of one source message: n* is the emission index whose frame
/// completed decoding (0 when never recovered). Only messages with
/// complete == true (all N emissions sent) enter recovery curves.
struct MessageOutcome {
    std::uint32_t station_id = 0;
    std::uint32_t message_id = 0;
    unsigned emissions = 0;
    bool complete = false;
    unsigned recovery_index = 0;
    std::vector<unsigned> rsu_recovery_index;  // per RSU, when tracked
};

/// Reception tallies for one RSU; bins are [i*kDistanceBinM, (i+1)*kDistanceBinM).
struct RsuTally {
    std::uint64_t attempts = 0;
    std::uint64_t deliveries = 0;
    std::vector<std::uint64_t> bin_attempts;
    std::vector<std::uint64_t> bin_losses;
};

/// One simulated world: vehicles drive their polylines, every CAM interval
/// each busy stream emits one coded frame, each RSU independently draws an
/// erasure, delivered frames go to the fog area's orchestrator. Idle streams
/// are refilled with deterministic synthetic sensor bytes so emission never
/// starves; recovered payloads are checked against the pushed bytes.
class World {
public:
    World(const scenario::Scenario& scenario, WorldOptions options = {});

    void step();
    void run();  // round(duration / cam_interval) steps

    std::uint64_t ticks() const { return tick_; }
    double time_s() const { return static_cast<double>(tick_) * scenario_->cam_interval_s; }

    std::uint64_t frames_emitted() const { return frames_emitted_; }
    std::uint64_t frames_delivered() const { return frames_delivered_; }
    std::uint64_t payload_mismatches() const { return payload_mismatches_; }
    std::uint64_t messages_emitted() const { return messages_.size(); }

    const std::vector<MessageOutcome>& messages() const { return messages_; }
    const std::vector<RsuTally>& rsu_tallies() const { return rsu_tallies_; }

    const FogOrchestrator& orchestrator(std::uint32_t fog_area) const;
    std::vector<const FogOrchestrator*> orchestrators() const;

private:
    struct VehicleState {
        const scenario::VehicleSpec* spec;
        facility::CamStream stream;
        std::size_t segment = 0;
        double segment_offset_m = 0.0;
        double x_m = 0.0;
        double y_m = 0.0;
        std::uint16_t heading = 0;
    };

    void advance(VehicleState& v, double dt_s);
    facility::Position wire_position(const VehicleState& v) const;
    void refill(VehicleState& v);
    void transmit(VehicleState& v, const facility::Emission& emission);
    MessageOutcome& outcome_for(std::uint32_t station_id, std::uint32_t message_id);

    const scenario::Scenario* scenario_;
    WorldOptions options_;
    std::vector<VehicleState> vehicles_;
    std::vector<const channel::RsuProfile*> rsus_;
    std::vector<std::uint32_t> rsu_fog_area_;
    std::vector<std::uint32_t> fog_areas_;  // distinct, in first-appearance order
    std::unordered_map<std::uint32_t, FogOrchestrator> fos_;
    channel::SimRng rng_;
    std::uint64_t tick_ = 0;

    std::vector<MessageOutcome> messages_;
    std::unordered_map<std::uint64_t, std::size_t> message_index_;
    std::unordered_map<std::uint64_t, std::vector<std::byte>> pending_payloads_;
    std::vector<RsuTally> rsu_tallies_;
    // Virtual per-RSU decoders, keyed like FogOrchestrator::decoder_key.
    std::vector<std::unordered_map<std::uint64_t, rlnc::Decoder>> rsu_decoders_;
    std::uint64_t frames_emitted_ = 0;
    std::uint64_t frames_delivered_ = 0;
    std::uint64_t payload_mismatches_ = 0;
};

struct SweepConfig {
    std::vector<unsigned> packet_counts{5, 10, 15};  // K values
    std::vector<unsigned> field_orders{2, 256};      // q values
    unsigned schedule_max = 100;                     // curves cover N in [K, schedule_max]
    std::uint32_t trials = 0;                        // 0 takes scenario.trials
    double epsilon = 0.0;                            // 0 takes scenario.epsilon
    unsigned threads = 1;
    bool per_rsu_curves = true;  // per-RSU curves when the scenario has > 1 RSU
};

struct MetricsReport {
    /// Empirical recovery histogram for one (K, q) over one receiver view.
    struct Curve {
        std::string label;  // "global" or "rsu<id>"
        unsigned packet_count = 0;  // K
        unsigned field_order = 0;   // q
        std::uint64_t messages = 0;            // completed messages observed
        std::vector<std::uint64_t> histogram;  // [j] = messages recovered at emission j
        std::uint64_t unrecovered = 0;

        double empirical_r(unsigned n) const;
        /// Smallest N with empirical_r(N) >= epsilon, or 0 when none.
        unsigned n_star(double epsilon, unsigned schedule_max) const;
    };

    struct DistanceBin {
        std::uint32_t rsu_id = 0;
        double lo_m = 0.0;
        double hi_m = 0.0;
        std::uint64_t attempts = 0;
        std::uint64_t losses = 0;

        double per() const {
            return attempts == 0 ? 0.0 : static_cast<double>(losses) / static_cast<double>(attempts);
        }
    };

    unsigned schedule_max = 0;
    double epsilon = 0.0;
    std::uint32_t trials = 0;
    std::uint64_t rng_seed = 0;
    double average_per = 0.0;  // losses / attempts across all RSU draws

    std::uint64_t frames_emitted = 0;
    std::uint64_t frames_delivered = 0;
    std::uint64_t duplicate_frames = 0;
    std::uint64_t forwarded_frames = 0;
    std::uint64_t malformed_frames = 0;
    std::uint64_t messages_emitted = 0;
    std::uint64_t messages_completed = 0;
    std::uint64_t messages_recovered = 0;
    std::uint64_t payload_mismatches = 0;

    std::vector<Curve> curves;
    std::vector<DistanceBin> distance_bins;

    const Curve* find_curve(const std::string& label, unsigned packet_count,
                            unsigned field_order) const;
};

/// Monte Carlo sweep: per (K, q) runs `trials` independent worlds at
/// schedule_max emissions per message; R(N) is the fraction of completed
/// messages whose recovery index n* is <= N, so one run yields the whole
/// curve. Trial i draws erasures from substream mix_seed(rng_seed + i).
/// Aggregation is in trial order, deterministic for any thread count.
MetricsReport run_monte_carlo(const scenario::Scenario& scenario, const SweepConfig& config = {});

/// Writes recovery_curves.csv and per_by_distance.csv into destination.
/// Files appear atomically (temp + rename); byte-identical for identical
/// reports.
void emit_report(const MetricsReport& report, const std::filesystem::path& destination);

}  // namespace fogcode::fogsim
