#include "fogcode/scenario.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

namespace fogcode::scenario {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(std::size_t line, const std::string& key, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ScenarioError(line, "'" + key + "': malformed number '" + s + "'");
    }
}

std::uint64_t to_u64(std::size_t line, const std::string& key, const std::string& s) {
    try {
        if (!s.empty() && s.front() == '-') throw std::invalid_argument(s);
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ScenarioError(line, "'" + key + "': malformed integer '" + s + "'");
    }
}

std::uint32_t to_u32(std::size_t line, const std::string& key, const std::string& s) {
    const std::uint64_t v = to_u64(line, key, s);
    if (v > 0xFFFF'FFFFull) {
        throw ScenarioError(line, "'" + key + "': value " + s + " exceeds 32 bits");
    }
    return static_cast<std::uint32_t>(v);
}

// One record line's key=value pairs; take() consumes, finish() rejects leftovers.
class Fields {
public:
    Fields(std::size_t line, std::string record) : line_(line), record_(std::move(record)) {}

    void add(const std::string& key, const std::string& value) {
        if (!kv_.emplace(key, value).second) {
            throw ScenarioError(line_, record_ + ": duplicate key '" + key + "'");
        }
    }

    std::string take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            throw ScenarioError(line_, record_ + ": missing required key '" + key + "'");
        }
        std::string v = std::move(it->second);
        kv_.erase(it);
        return v;
    }

    std::optional<std::string> take_opt(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        std::string v = std::move(it->second);
        kv_.erase(it);
        return v;
    }

    bool has(const std::string& key) const { return kv_.contains(key); }

    void finish() const {
        if (!kv_.empty()) {
            throw ScenarioError(line_, record_ + ": unknown key '" + kv_.begin()->first + "'");
        }
    }

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
    std::string record_;
    std::map<std::string, std::string> kv_;
};

Fields collect_fields(std::size_t line, const std::string& record,
                      const std::vector<std::string>& tokens) {
    Fields f(line, record);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ScenarioError(line, record + ": expected key=value, got '" + tokens[i] + "'");
        }
        f.add(tokens[i].substr(0, eq), tokens[i].substr(eq + 1));
    }
    return f;
}

channel::DistanceProfile parse_bands_profile(Fields& f) {
    channel::DistanceProfile p;
    for (const auto& item : split(f.take("bands"), ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) {
            throw ScenarioError(f.line(), "rsu: band '" + item + "' is not distance:per");
        }
        p.bands.push_back({to_double(f.line(), "bands", parts[0]),
                           to_double(f.line(), "bands", parts[1])});
    }
    if (const auto ramp = f.take_opt("ramp")) {
        const auto parts = split(*ramp, ',');
        if (parts.size() != 4) {
            throw ScenarioError(f.line(), "rsu: ramp needs start,end,per_start,per_end");
        }
        p.ramp_start_m = to_double(f.line(), "ramp", parts[0]);
        p.ramp_end_m = to_double(f.line(), "ramp", parts[1]);
        p.ramp_per_start = to_double(f.line(), "ramp", parts[2]);
        p.ramp_per_end = to_double(f.line(), "ramp", parts[3]);
    } else if (!p.bands.empty()) {
        // No ramp: coverage ends at the last band.
        p.ramp_start_m = p.ramp_end_m = p.bands.back().max_distance_m;
        p.ramp_per_start = p.ramp_per_end = p.bands.back().per;
    }
    return p;
}

channel::PerGrid parse_grid_profile(Fields& f, const std::filesystem::path& base_dir) {
    double cell_size = 2.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    if (const auto cs = f.take_opt("cell_size")) {
        cell_size = to_double(f.line(), "cell_size", *cs);
        if (cell_size <= 0.0) throw ScenarioError(f.line(), "rsu: cell_size must be positive");
    }
    if (const auto org = f.take_opt("origin")) {
        const auto parts = split(*org, ',');
        if (parts.size() != 2) throw ScenarioError(f.line(), "rsu: origin needs x,y");
        origin_x = to_double(f.line(), "origin", parts[0]);
        origin_y = to_double(f.line(), "origin", parts[1]);
    }
    const std::string rel = f.take("grid");
    const std::filesystem::path path =
        std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base_dir / rel;
    try {
        return channel::load_grid_file(path, cell_size, origin_x, origin_y);
    } catch (const channel::GridError& e) {
        throw ScenarioError(f.line(), "rsu: grid '" + rel + "': " + e.what());
    } catch (const std::exception& e) {
        throw ScenarioError(f.line(), "rsu: " + std::string(e.what()));
    }
}

RsuSpec parse_rsu(Fields& f, const std::filesystem::path& base_dir) {
    RsuSpec spec;
    spec.profile.rsu_id = to_u32(f.line(), "id", f.take("id"));
    spec.profile.x_m = to_double(f.line(), "x", f.take("x"));
    spec.profile.y_m = to_double(f.line(), "y", f.take("y"));
    spec.profile.height_m = to_double(f.line(), "height", f.take("height"));
    if (spec.profile.height_m < 0.0) {
        throw ScenarioError(f.line(), "rsu: height must be non-negative");
    }
    spec.fog_area = to_u32(f.line(), "fog_area", f.take("fog_area"));
    if (const auto ps = f.take_opt("per_scale")) {
        spec.profile.per_scale = to_double(f.line(), "per_scale", *ps);
        if (spec.profile.per_scale < 0.0) {
            throw ScenarioError(f.line(), "rsu: per_scale must be non-negative");
        }
    }
    const std::string profile = f.take("profile");
    if (profile == "bristol") {
        spec.profile.model = channel::DistanceProfile::bristol_rsu1();
    } else if (profile == "bands") {
        auto p = parse_bands_profile(f);
        try {
            p.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(f.line(), "rsu: " + std::string(e.what()));
        }
        spec.profile.model = std::move(p);
    } else if (profile == "grid") {
        spec.profile.model = parse_grid_profile(f, base_dir);
    } else {
        throw ScenarioError(f.line(), "rsu: unknown profile '" + profile +
                                          "' (expected bristol, bands or grid)");
    }
    f.finish();
    return spec;
}

VehicleSpec parse_vehicle(Fields& f) {
    VehicleSpec v;
    v.station_id = to_u32(f.line(), "station_id", f.take("station_id"));
    v.source_packets = to_u32(f.line(), "k", f.take("k"));
    if (v.source_packets < 1) throw ScenarioError(f.line(), "vehicle: k must be >= 1");
    v.coded_packets = to_u32(f.line(), "n", f.take("n"));
    if (v.coded_packets < v.source_packets) {
        throw ScenarioError(f.line(), "vehicle: n must be >= k");
    }
    if (const auto q = f.take_opt("q")) {
        v.field_order = to_u32(f.line(), "q", *q);
        if (!std::has_single_bit(v.field_order) || v.field_order < 2 || v.field_order > 256) {
            throw ScenarioError(f.line(), "vehicle: q must be a power of two in [2, 256]");
        }
    }
    if (const auto fb = f.take_opt("frame_budget")) {
        v.frame_budget = to_u32(f.line(), "frame_budget", *fb);
        if (v.frame_budget <= wire::kFixedOverheadBytes || v.frame_budget > wire::kMaxFrameBytes) {
            throw ScenarioError(f.line(), "vehicle: frame_budget must be in [" +
                                              std::to_string(wire::kFixedOverheadBytes + 1) +
                                              ", " + std::to_string(wire::kMaxFrameBytes) + "]");
        }
    }
    for (const auto& wp : split(f.take("waypoints"), ':')) {
        const auto parts = split(wp, ',');
        if (parts.size() != 2) {
            throw ScenarioError(f.line(), "vehicle: waypoint '" + wp + "' is not x,y");
        }
        v.waypoints.push_back({to_double(f.line(), "waypoints", parts[0]),
                               to_double(f.line(), "waypoints", parts[1])});
    }
    if (v.waypoints.empty()) throw ScenarioError(f.line(), "vehicle: waypoints is empty");

    const std::size_t segments = v.waypoints.size() - 1;
    const auto speed = f.take_opt("speed");
    const auto speeds = f.take_opt("speeds");
    if (segments == 0) {
        if (speed || speeds) {
            throw ScenarioError(f.line(), "vehicle: stationary vehicle takes no speed");
        }
    } else {
        if (speed && speeds) {
            throw ScenarioError(f.line(), "vehicle: give either speed or speeds, not both");
        }
        if (speed) {
            v.segment_speeds_mps.assign(segments, to_double(f.line(), "speed", *speed));
        } else if (speeds) {
            for (const auto& s : split(*speeds, ',')) {
                v.segment_speeds_mps.push_back(to_double(f.line(), "speeds", s));
            }
            if (v.segment_speeds_mps.size() != segments) {
                throw ScenarioError(f.line(), "vehicle: " + std::to_string(segments) +
                                                  " segments but " +
                                                  std::to_string(v.segment_speeds_mps.size()) +
                                                  " speeds");
            }
        } else {
            throw ScenarioError(f.line(), "vehicle: missing required key 'speed'");
        }
        for (double s : v.segment_speeds_mps) {
            if (s <= 0.0) throw ScenarioError(f.line(), "vehicle: speeds must be positive");
        }
        for (std::size_t i = 0; i < segments; ++i) {
            const double dx = v.waypoints[i + 1].x_m - v.waypoints[i].x_m;
            const double dy = v.waypoints[i + 1].y_m - v.waypoints[i].y_m;
            if (dx == 0.0 && dy == 0.0) {
                throw ScenarioError(f.line(), "vehicle: zero-length segment at waypoint " +
                                                  std::to_string(i));
            }
        }
    }
    f.finish();
    return v;
}

}  // namespace

void Scenario::validate() const {
    if (rsus.empty()) throw ScenarioError(0, "scenario declares no RSUs");
    if (vehicles.empty()) throw ScenarioError(0, "scenario declares no vehicles");
    if (!(duration_s > 0.0)) throw ScenarioError(0, "duration must be positive");
    if (!(cam_interval_s > 0.0)) throw ScenarioError(0, "cam_interval must be positive");
    if (trials < 1) throw ScenarioError(0, "trials must be >= 1");
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
        throw ScenarioError(0, "epsilon must be in (0, 1)");
    }
}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
    Scenario sc;
    std::set<std::string> globals_seen;
    std::set<std::uint32_t> rsu_ids;
    std::set<std::uint32_t> station_ids;
    bool duration_seen = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty() || tokens[0][0] == '#') continue;

        const std::string& head = tokens[0];
        if (head == "rsu" || head == "vehicle") {
            Fields f = collect_fields(line_no, head, tokens);
            if (head == "rsu") {
                RsuSpec spec = parse_rsu(f, base_dir);
                if (!rsu_ids.insert(spec.profile.rsu_id).second) {
                    throw ScenarioError(line_no, "duplicate rsu id " +
                                                     std::to_string(spec.profile.rsu_id));
                }
                sc.rsus.push_back(std::move(spec));
            } else {
                VehicleSpec v = parse_vehicle(f);
                if (!station_ids.insert(v.station_id).second) {
                    throw ScenarioError(line_no, "duplicate vehicle station_id " +
                                                     std::to_string(v.station_id));
                }
                sc.vehicles.push_back(std::move(v));
            }
            continue;
        }

        if (tokens.size() != 2) {
            throw ScenarioError(line_no, "expected '" + head + " <value>'");
        }
        if (!globals_seen.insert(head).second) {
            throw ScenarioError(line_no, "duplicate setting '" + head + "'");
        }
        const std::string& value = tokens[1];
        if (head == "duration") {
            sc.duration_s = to_double(line_no, head, value);
            if (!(sc.duration_s > 0.0)) {
                throw ScenarioError(line_no, "duration must be positive");
            }
            duration_seen = true;
        } else if (head == "cam_interval") {
            sc.cam_interval_s = to_double(line_no, head, value);
            if (!(sc.cam_interval_s > 0.0)) {
                throw ScenarioError(line_no, "cam_interval must be positive");
            }
        } else if (head == "trials") {
            sc.trials = to_u32(line_no, head, value);
            if (sc.trials < 1) throw ScenarioError(line_no, "trials must be >= 1");
        } else if (head == "seed") {
            sc.rng_seed = to_u64(line_no, head, value);
        } else if (head == "epsilon") {
            sc.epsilon = to_double(line_no, head, value);
            if (!(sc.epsilon > 0.0) || !(sc.epsilon < 1.0)) {
                throw ScenarioError(line_no, "epsilon must be in (0, 1)");
            }
        } else {
            throw ScenarioError(line_no, "unknown directive '" + head + "'");
        }
    }

    if (!duration_seen) throw ScenarioError(0, "missing 'duration'");
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(0, "cannot open scenario file '" + path.string() + "'");
    }
    return parse_scenario(in, path.parent_path());
}

}  // namespace fogcode::scenario
