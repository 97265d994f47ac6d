#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace fogcode::channel {

/// Piecewise PER model over 3-D distance: flat bands, then a linear ramp,
/// then loss of everything beyond the ramp end.
struct DistanceProfile {
    struct Band {
        double max_distance_m = 0.0;  // upper bound of the band
        double per = 0.0;
    };

    std::vector<Band> bands;     // strictly increasing bounds
    double ramp_start_m = 0.0;   // equals the last band bound
    double ramp_end_m = 0.0;     // coverage cutoff; beyond it PER = 1
    double ramp_per_start = 1.0;
    double ramp_per_end = 1.0;

    /// Throws std::invalid_argument when bounds are not increasing or any
    /// PER leaves [0, 1].
    void validate() const;

    double per_at(double distance_m) const;

    /// Calibration of a measured urban roadside unit: PER 0.20 within 35 m,
    /// 0.40 out to 160 m, rising 0.75 to 0.90 out to the 300 m cutoff.
    static DistanceProfile bristol_rsu1();
};

/// Cell-indexed delivery-rate map (heatmap ingestion). Cells default to
/// delivery 0; anything outside the populated grid is PER 1.
struct PerGrid {
    double origin_x_m = 0.0;
    double origin_y_m = 0.0;
    double cell_size_m = 2.0;  // 2 m cells, 4 m^2 each
    std::unordered_map<std::uint64_t, double> cells;  // packed (ix,iy) -> delivery

    static std::uint64_t cell_key(std::int32_t ix, std::int32_t iy);

    void set_cell(std::int32_t ix, std::int32_t iy, double delivery_rate);

    /// Delivery rate of the cell containing (x, y); 0 when unpopulated.
    double delivery_at(double x_m, double y_m) const;
};

/// Malformed grid CSV; line() is 1-based.
class GridError : public std::runtime_error {
public:
    GridError(std::size_t line, const std::string& message)
        : std::runtime_error("grid csv line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads the `x_cell,y_cell,delivery_rate` CSV (header required, `#`
/// comments allowed). Duplicate cells and out-of-range rates are errors.
PerGrid load_grid(std::istream& in, double cell_size_m = 2.0, double origin_x_m = 0.0,
                  double origin_y_m = 0.0);
PerGrid load_grid_file(const std::string& path, double cell_size_m = 2.0,
                       double origin_x_m = 0.0, double origin_y_m = 0.0);

/// One deployed roadside unit: antenna position plus its loss model.
struct RsuProfile {
    std::uint32_t rsu_id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    double height_m = 0.0;
    std::variant<DistanceProfile, PerGrid> model = DistanceProfile{};
    double per_scale = 1.0;  // multiplicative adjustment, result clamped to [0,1]
};

/// Default relative calibration between the four measured RSUs.
inline constexpr double kRsuPerScales[4] = {1.0, 1.10, 1.0, 0.85};
inline constexpr double kRsuHeightsM[4] = {8.0, 5.0, 25.0, 12.0};

/// PER seen by the RSU for a transmitter at ground position (x, y): 3-D
/// distance through the bands for a DistanceProfile, or 1 - delivery of
/// the containing cell for a PerGrid, scaled by per_scale and clamped.
double per_at(const RsuProfile& rsu, double x_m, double y_m);

/// Simulation randomness. mt19937_64 with a hand-rolled uniform so draws
/// are bit-identical across platforms.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 step; used to derive independent per-trial substreams.
std::uint64_t mix_seed(std::uint64_t state);

/// True (lost) with probability per.
inline bool draw_erasure(double per, SimRng& rng) { return rng.uniform01() < per; }

}  // namespace fogcode::channel
