#include "fogcode/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace fogcode::channel {

void DistanceProfile::validate() const {
    double prev = 0.0;
    for (const Band& b : bands) {
        if (b.max_distance_m <= prev) {
            throw std::invalid_argument("distance profile: band bounds must be strictly increasing");
        }
        if (b.per < 0.0 || b.per > 1.0) {
            throw std::invalid_argument("distance profile: PER outside [0, 1]");
        }
        prev = b.max_distance_m;
    }
    if (ramp_start_m < prev || ramp_end_m < ramp_start_m) {
        throw std::invalid_argument("distance profile: ramp range must follow the bands");
    }
    for (double p : {ramp_per_start, ramp_per_end}) {
        if (p < 0.0 || p > 1.0) {
            throw std::invalid_argument("distance profile: ramp PER outside [0, 1]");
        }
    }
}

double DistanceProfile::per_at(double distance_m) const {
    for (const Band& b : bands) {
        if (distance_m <= b.max_distance_m) {
            return b.per;
        }
    }
    if (distance_m <= ramp_end_m && ramp_end_m > ramp_start_m) {
        const double f = (distance_m - ramp_start_m) / (ramp_end_m - ramp_start_m);
        return ramp_per_start + f * (ramp_per_end - ramp_per_start);
    }
    return 1.0;
}

DistanceProfile DistanceProfile::bristol_rsu1() {
    DistanceProfile p;
    p.bands = {{35.0, 0.20}, {160.0, 0.40}};
    p.ramp_start_m = 160.0;
    p.ramp_end_m = 300.0;  // coverage cutoff; the measured plot is distance-truncated
    p.ramp_per_start = 0.75;
    p.ramp_per_end = 0.90;
    return p;
}

std::uint64_t PerGrid::cell_key(std::int32_t ix, std::int32_t iy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
           static_cast<std::uint32_t>(iy);
}

void PerGrid::set_cell(std::int32_t ix, std::int32_t iy, double delivery_rate) {
    cells[cell_key(ix, iy)] = delivery_rate;
}

double PerGrid::delivery_at(double x_m, double y_m) const {
    const double fx = std::floor((x_m - origin_x_m) / cell_size_m);
    const double fy = std::floor((y_m - origin_y_m) / cell_size_m);
    if (fx < -2147483648.0 || fx > 2147483647.0 || fy < -2147483648.0 || fy > 2147483647.0) {
        return 0.0;
    }
    const auto it = cells.find(cell_key(static_cast<std::int32_t>(fx),
                                        static_cast<std::int32_t>(fy)));
    return it == cells.end() ? 0.0 : it->second;
}

PerGrid load_grid(std::istream& in, double cell_size_m, double origin_x_m,
                  double origin_y_m) {
    if (cell_size_m <= 0.0) {
        throw std::invalid_argument("grid: cell size must be positive");
    }
    PerGrid grid;
    grid.cell_size_m = cell_size_m;
    grid.origin_x_m = origin_x_m;
    grid.origin_y_m = origin_y_m;

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        if (!header_seen) {
            std::string compact;
            for (char c : line) {
                if (!std::isspace(static_cast<unsigned char>(c))) {
                    compact += c;
                }
            }
            if (compact != "x_cell,y_cell,delivery_rate") {
                throw GridError(line_no,
                                "expected header 'x_cell,y_cell,delivery_rate', got '" +
                                    line + "'");
            }
            header_seen = true;
            continue;
        }

        std::istringstream row(line);
        std::string fx, fy, frate;
        if (!std::getline(row, fx, ',') || !std::getline(row, fy, ',') ||
            !std::getline(row, frate)) {
            throw GridError(line_no, "expected 3 comma-separated fields");
        }
        const auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        fx = trim(fx);
        fy = trim(fy);
        frate = trim(frate);

        std::int32_t ix = 0;
        std::int32_t iy = 0;
        double rate = 0.0;
        try {
            std::size_t ux = 0;
            std::size_t uy = 0;
            std::size_t ur = 0;
            ix = static_cast<std::int32_t>(std::stol(fx, &ux));
            iy = static_cast<std::int32_t>(std::stol(fy, &uy));
            rate = std::stod(frate, &ur);
            if (ux != fx.size() || uy != fy.size() || ur != frate.size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw GridError(line_no, "malformed row '" + line + "'");
        }
        if (rate < 0.0 || rate > 1.0) {
            throw GridError(line_no, "delivery_rate " + frate + " outside [0, 1]");
        }
        const std::uint64_t key = PerGrid::cell_key(ix, iy);
        if (grid.cells.contains(key)) {
            throw GridError(line_no, "duplicate cell (" + fx + "," + fy + ")");
        }
        grid.cells[key] = rate;
    }
    if (!header_seen) {
        throw GridError(1, "missing header 'x_cell,y_cell,delivery_rate'");
    }
    return grid;
}

PerGrid load_grid_file(const std::string& path, double cell_size_m, double origin_x_m,
                       double origin_y_m) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("grid: cannot open '" + path + "'");
    }
    return load_grid(in, cell_size_m, origin_x_m, origin_y_m);
}

double per_at(const RsuProfile& rsu, double x_m, double y_m) {
    double per = 1.0;
    if (const auto* profile = std::get_if<DistanceProfile>(&rsu.model)) {
        const double dx = x_m - rsu.x_m;
        const double dy = y_m - rsu.y_m;
        const double d = std::sqrt(dx * dx + dy * dy + rsu.height_m * rsu.height_m);
        per = profile->per_at(d);
    } else {
        per = 1.0 - std::get<PerGrid>(rsu.model).delivery_at(x_m, y_m);
    }
    return std::clamp(per * rsu.per_scale, 0.0, 1.0);
}

std::uint64_t mix_seed(std::uint64_t state) {
    std::uint64_t z = state + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace fogcode::channel
