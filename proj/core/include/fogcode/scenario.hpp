#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogcode/channel.hpp"
#include "fogcode/wire.hpp"

namespace fogcode::scenario {

// Thrown on malformed or invalid scenario text. line() is 1-based; 0 means
// the error is not tied to a single line.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::size_t line, const std::string& what_arg)
        : std::runtime_error(line == 0
                                 ? what_arg
                                 : "line " + std::to_string(line) + ": " + what_arg),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Waypoint {
    double x_m = 0.0;
    double y_m = 0.0;
};

struct VehicleSpec {
    std::uint32_t station_id = 0;
    unsigned source_packets = 1;  // K
    unsigned coded_packets = 1;   // N, emissions per generation
    unsigned field_order = 256;   // q
    std::size_t frame_budget = wire::kMaxFrameBytes;
    std::vector<Waypoint> waypoints;         // a single entry means stationary
    std::vector<double> segment_speeds_mps;  // waypoints.size() - 1 entries
};

struct RsuSpec {
    channel::RsuProfile profile;
    std::uint32_t fog_area = 0;
};

struct Scenario {
    double duration_s = 0.0;
    double cam_interval_s = 0.01;
    std::uint32_t trials = 1;
    std::uint64_t rng_seed = 0;
    double epsilon = 0.01;
    std::vector<RsuSpec> rsus;
    std::vector<VehicleSpec> vehicles;

    // Cross-record invariants: at least one RSU and one vehicle, positive
    // duration and interval, trials >= 1, epsilon in (0, 1).
    void validate() const;
};

// Parses the line-based scenario text (see README for the schema). Relative
// grid CSV paths are resolved against base_dir. Throws ScenarioError.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {});

Scenario load_scenario(const std::filesystem::path& path);

}  // namespace fogcode::scenario
