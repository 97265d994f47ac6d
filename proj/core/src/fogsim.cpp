#include "fogcode/fogsim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <utility>

namespace fogcode::fogsim {

namespace {

std::uint64_t station_message_key(std::uint32_t station_id, std::uint32_t message_id) {
    return (static_cast<std::uint64_t>(station_id) << 32) | message_id;
}

unsigned degree_of(unsigned field_order) {
    if (!std::has_single_bit(field_order) || field_order < 2 || field_order > 256) {
        throw std::invalid_argument("fogsim: field order must be a power of two in [2, 256]");
    }
    return static_cast<unsigned>(std::countr_zero(field_order));
}

std::size_t packed_payload_bytes(const RlncParams& p) {
    return (p.packet_symbols * p.field.degree() + 7) / 8;
}

}  // namespace

std::size_t FogOrchestrator::DedupHash::operator()(const DedupKey& k) const {
    std::uint64_t h = (static_cast<std::uint64_t>(k.station_id) << 32) | k.message_id;
    return static_cast<std::size_t>(channel::mix_seed(h ^ (static_cast<std::uint64_t>(k.seed) << 17)));
}

void FogOrchestrator::register_station(std::uint32_t station_id, const RlncParams& params) {
    if (params.source_packets < 1 || params.packet_symbols < 1) {
        throw std::invalid_argument("fogsim: station params need K >= 1 and L >= 1");
    }
    stations_.insert_or_assign(station_id, params);
}

IngestOutcome FogOrchestrator::ingest_frame(std::span<const std::byte> frame, double time_s,
                                            std::uint32_t emission_index) {
    wire::RlncCam cam;
    try {
        cam = wire::parse(frame);
    } catch (const wire::ParseError&) {
        ++delivered_;
        ++malformed_;
        return {};
    }
    return ingest(cam, time_s, emission_index);
}

IngestOutcome FogOrchestrator::ingest(const wire::RlncCam& cam, double time_s,
                                      std::uint32_t emission_index) {
    ++delivered_;
    IngestOutcome out;
    out.station_id = cam.station_id;
    out.message_id = cam.source_message_id;

    const auto st = stations_.find(cam.station_id);
    if (st == stations_.end()) {
        ++unknown_station_;
        out.status = IngestOutcome::Status::kUnknownStation;
        return out;
    }
    const RlncParams& params = st->second;
    if (cam.field_size_code + 1u != params.field.degree() ||
        cam.coded_payload.size() != packed_payload_bytes(params)) {
        ++malformed_;
        out.status = IngestOutcome::Status::kMalformed;
        return out;
    }

    if (!seen_.insert({cam.station_id, cam.source_message_id, cam.coding_seed}).second) {
        ++duplicates_;
        out.status = IngestOutcome::Status::kDuplicate;
        return out;
    }

    auto [it, created] = decoders_.try_emplace(
        decoder_key(cam.station_id, cam.source_message_id), cam.source_message_id,
        params.source_packets, params.packet_symbols, params.field);
    rlnc::Decoder& dec = it->second;
    const rlnc::CodedPacket pkt{
        cam.source_message_id, cam.coding_seed,
        rlnc::unpack_symbols(cam.coded_payload, params.field.degree(), params.packet_symbols)};
    const bool innovative = dec.ingest(pkt);
    ++forwarded_;
    out.status = IngestOutcome::Status::kForwarded;
    out.rank = static_cast<unsigned>(dec.rank());
    if (innovative && dec.complete()) {
        out.recovered = true;
        recoveries_.push_back({cam.station_id, cam.source_message_id, time_s, emission_index});
    }
    if (rank_log_enabled_) {
        rank_log_.push_back({cam.station_id, cam.source_message_id, out.rank});
    }
    return out;
}

const rlnc::Decoder* FogOrchestrator::decoder(std::uint32_t station_id,
                                              std::uint32_t message_id) const {
    const auto it = decoders_.find(decoder_key(station_id, message_id));
    return it == decoders_.end() ? nullptr : &it->second;
}

World::World(const scenario::Scenario& scenario, WorldOptions options)
    : scenario_(&scenario), options_(std::move(options)), rng_(options_.rng_seed) {
    scenario.validate();

    rsus_.reserve(scenario.rsus.size());
    for (const auto& spec : scenario.rsus) {
        rsus_.push_back(&spec.profile);
        rsu_fog_area_.push_back(spec.fog_area);
        if (std::find(fog_areas_.begin(), fog_areas_.end(), spec.fog_area) == fog_areas_.end()) {
            fog_areas_.push_back(spec.fog_area);
        }
    }
    rsu_tallies_.resize(rsus_.size());
    if (options_.per_rsu_decoders) rsu_decoders_.resize(rsus_.size());

    std::unordered_map<unsigned, gf::Field> field_cache;
    vehicles_.reserve(scenario.vehicles.size());
    for (const auto& spec : scenario.vehicles) {
        facility::Config cfg;
        cfg.source_packets = options_.packet_count ? options_.packet_count : spec.source_packets;
        cfg.coded_packets = options_.schedule ? options_.schedule : spec.coded_packets;
        cfg.cam_interval_s = scenario.cam_interval_s;
        cfg.frame_budget = spec.frame_budget;
        cfg.station_id = spec.station_id;
        cfg.first_message_id = options_.first_message_id;
        if (options_.field) {
            cfg.field = *options_.field;
        } else {
            const unsigned degree = degree_of(spec.field_order);
            cfg.field = field_cache.try_emplace(degree, degree).first->second;
        }
        if (cfg.coded_packets < cfg.source_packets) {
            throw std::invalid_argument("fogsim: schedule override is below K");
        }
        vehicles_.push_back({&spec, facility::CamStream(std::move(cfg))});
        VehicleState& v = vehicles_.back();
        v.x_m = spec.waypoints.front().x_m;
        v.y_m = spec.waypoints.front().y_m;
        advance(v, 0.0);
    }

    for (std::uint32_t area : fog_areas_) {
        FogOrchestrator& fo = fos_[area];
        fo.enable_rank_log(options_.rank_log);
        for (const auto& v : vehicles_) {
            fo.register_station(v.spec->station_id,
                                {static_cast<unsigned>(v.stream.config().source_packets),
                                 v.stream.payload_symbols(), v.stream.config().field});
        }
    }
}

void World::advance(VehicleState& v, double dt_s) {
    const auto& wp = v.spec->waypoints;
    const auto& speeds = v.spec->segment_speeds_mps;
    double t = dt_s;
    while (t > 0.0 && v.segment < speeds.size()) {
        const auto& a = wp[v.segment];
        const auto& b = wp[v.segment + 1];
        const double length = std::hypot(b.x_m - a.x_m, b.y_m - a.y_m);
        const double left = length - v.segment_offset_m;
        const double stride = speeds[v.segment] * t;
        if (stride < left) {
            v.segment_offset_m += stride;
            t = 0.0;
        } else {
            t -= left / speeds[v.segment];
            ++v.segment;
            v.segment_offset_m = 0.0;
        }
    }

    if (speeds.empty()) {
        v.x_m = wp.front().x_m;
        v.y_m = wp.front().y_m;
        return;
    }
    const std::size_t seg = std::min(v.segment, speeds.size() - 1);
    const auto& a = wp[seg];
    const auto& b = wp[seg + 1];
    const double length = std::hypot(b.x_m - a.x_m, b.y_m - a.y_m);
    const double frac =
        v.segment >= speeds.size() ? 1.0 : std::min(v.segment_offset_m / length, 1.0);
    v.x_m = a.x_m + (b.x_m - a.x_m) * frac;
    v.y_m = a.y_m + (b.y_m - a.y_m) * frac;
    double deg =
        std::atan2(b.x_m - a.x_m, b.y_m - a.y_m) * 180.0 / std::numbers::pi;  // clockwise from north
    if (deg < 0.0) deg += 360.0;
    v.heading = static_cast<std::uint16_t>(std::lround(deg * 10.0) % 3600);
}

facility::Position World::wire_position(const VehicleState& v) const {
    constexpr double kMetersPerDegreeLat = 111320.0;
    const double lat_deg = kAnchorLatitudeDeg + v.y_m / kMetersPerDegreeLat;
    const double lon_scale =
        kMetersPerDegreeLat * std::cos(kAnchorLatitudeDeg * std::numbers::pi / 180.0);
    const double lon_deg = kAnchorLongitudeDeg + v.x_m / lon_scale;
    facility::Position pos;
    pos.latitude = static_cast<std::int32_t>(std::clamp<long>(
        std::lround(lat_deg * 1e7), -wire::kMaxLatitude, wire::kMaxLatitude));
    pos.longitude = static_cast<std::int32_t>(std::clamp<long>(
        std::lround(lon_deg * 1e7), -wire::kMaxLongitude, wire::kMaxLongitude));
    pos.elevation = 0;
    pos.heading = v.heading;
    return pos;
}

void World::refill(VehicleState& v) {
    if (v.stream.busy()) return;
    const std::uint32_t message_id = v.stream.next_message_id();
    std::vector<std::byte> bytes(v.stream.generation_bytes());
    rlnc::Xorshift32 prng(facility::derive_seed(v.spec->station_id, message_id, 0));
    for (auto& b : bytes) b = static_cast<std::byte>(prng.next() & 0xFF);
    pending_payloads_.emplace(station_message_key(v.spec->station_id, message_id), bytes);
    v.stream.push(bytes);
}

MessageOutcome& World::outcome_for(std::uint32_t station_id, std::uint32_t message_id) {
    const auto [it, created] =
        message_index_.try_emplace(station_message_key(station_id, message_id), messages_.size());
    if (created) {
        MessageOutcome m;
        m.station_id = station_id;
        m.message_id = message_id;
        if (options_.per_rsu_decoders) m.rsu_recovery_index.assign(rsus_.size(), 0);
        messages_.push_back(std::move(m));
    }
    return messages_[it->second];
}

void World::transmit(VehicleState& v, const facility::Emission& emission) {
    ++frames_emitted_;
    MessageOutcome& msg = outcome_for(v.spec->station_id, emission.cam.source_message_id);
    ++msg.emissions;
    if (msg.emissions == v.stream.config().coded_packets) msg.complete = true;

    const std::vector<std::byte> frame = wire::serialize(emission.cam);
    const double now_s = time_s();
    std::optional<rlnc::CodedPacket> pkt;  // built lazily for virtual decoders

    for (std::size_t r = 0; r < rsus_.size(); ++r) {
        const channel::RsuProfile& rsu = *rsus_[r];
        const double dx = v.x_m - rsu.x_m;
        const double dy = v.y_m - rsu.y_m;
        const double distance = std::sqrt(dx * dx + dy * dy + rsu.height_m * rsu.height_m);
        const double per = channel::per_at(rsu, v.x_m, v.y_m);

        RsuTally& tally = rsu_tallies_[r];
        ++tally.attempts;
        const auto bin = static_cast<std::size_t>(distance / kDistanceBinM);
        if (bin >= tally.bin_attempts.size()) {
            tally.bin_attempts.resize(bin + 1, 0);
            tally.bin_losses.resize(bin + 1, 0);
        }
        ++tally.bin_attempts[bin];

        if (channel::draw_erasure(per, rng_)) {
            ++tally.bin_losses[bin];
            continue;
        }
        ++tally.deliveries;
        ++frames_delivered_;

        FogOrchestrator& fo = fos_.at(rsu_fog_area_[r]);
        const IngestOutcome out = fo.ingest_frame(frame, now_s, emission.emission_index);
        if (out.recovered) {
            if (msg.recovery_index == 0) msg.recovery_index = emission.emission_index;
            const auto key = station_message_key(msg.station_id, msg.message_id);
            if (const auto pending = pending_payloads_.find(key);
                pending != pending_payloads_.end()) {
                const rlnc::Decoder* dec = fo.decoder(msg.station_id, msg.message_id);
                const auto bytes = dec->recover_bytes(pending->second.size());
                if (!bytes || *bytes != pending->second) ++payload_mismatches_;
                pending_payloads_.erase(pending);
            }
        }

        if (options_.per_rsu_decoders) {
            if (!pkt) {
                pkt = rlnc::CodedPacket{
                    emission.cam.source_message_id, emission.cam.coding_seed,
                    rlnc::unpack_symbols(emission.cam.coded_payload,
                                         v.stream.config().field.degree(),
                                         v.stream.payload_symbols())};
            }
            auto [it, created] = rsu_decoders_[r].try_emplace(
                station_message_key(msg.station_id, msg.message_id),
                emission.cam.source_message_id,
                v.stream.config().source_packets, v.stream.payload_symbols(),
                v.stream.config().field);
            rlnc::Decoder& dec = it->second;
            if (!dec.complete() && dec.ingest(*pkt) && dec.complete()) {
                msg.rsu_recovery_index[r] = emission.emission_index;
            }
        }
    }
}

void World::step() {
    const auto now_ms = static_cast<std::uint64_t>(
        std::llround(time_s() * 1000.0));
    for (auto& v : vehicles_) {
        refill(v);
        if (const auto emission = v.stream.tick(now_ms, wire_position(v))) {
            transmit(v, *emission);
        }
    }
    for (auto& v : vehicles_) advance(v, scenario_->cam_interval_s);
    ++tick_;
}

void World::run() {
    const auto ticks = static_cast<std::uint64_t>(
        std::llround(scenario_->duration_s / scenario_->cam_interval_s));
    while (tick_ < ticks) step();
}

const FogOrchestrator& World::orchestrator(std::uint32_t fog_area) const {
    const auto it = fos_.find(fog_area);
    if (it == fos_.end()) {
        throw std::invalid_argument("fogsim: no fog area " + std::to_string(fog_area));
    }
    return it->second;
}

std::vector<const FogOrchestrator*> World::orchestrators() const {
    std::vector<const FogOrchestrator*> out;
    out.reserve(fog_areas_.size());
    for (std::uint32_t area : fog_areas_) out.push_back(&fos_.at(area));
    return out;
}

double MetricsReport::Curve::empirical_r(unsigned n) const {
    if (messages == 0) return 0.0;
    std::uint64_t recovered = 0;
    const auto last = std::min<std::size_t>(n, histogram.empty() ? 0 : histogram.size() - 1);
    for (std::size_t j = 1; j <= last; ++j) recovered += histogram[j];
    return static_cast<double>(recovered) / static_cast<double>(messages);
}

unsigned MetricsReport::Curve::n_star(double epsilon, unsigned schedule_max) const {
    for (unsigned n = packet_count; n <= schedule_max; ++n) {
        if (empirical_r(n) >= epsilon) return n;
    }
    return 0;
}

const MetricsReport::Curve* MetricsReport::find_curve(const std::string& label,
                                                      unsigned packet_count,
                                                      unsigned field_order) const {
    for (const auto& c : curves) {
        if (c.label == label && c.packet_count == packet_count && c.field_order == field_order) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

struct TrialSummary {
    std::vector<MessageOutcome> messages;
    std::vector<RsuTally> tallies;
    std::uint64_t frames_emitted = 0;
    std::uint64_t frames_delivered = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t malformed = 0;
    std::uint64_t payload_mismatches = 0;
};

TrialSummary run_trial(const scenario::Scenario& sc, const WorldOptions& options) {
    World world(sc, options);
    world.run();
    TrialSummary s;
    s.messages = world.messages();
    s.tallies = world.rsu_tallies();
    s.frames_emitted = world.frames_emitted();
    s.frames_delivered = world.frames_delivered();
    s.payload_mismatches = world.payload_mismatches();
    for (const FogOrchestrator* fo : world.orchestrators()) {
        s.duplicates += fo->duplicate_frames();
        s.forwarded += fo->forwarded_frames();
        s.malformed += fo->malformed_frames();
    }
    return s;
}

}  // namespace

MetricsReport run_monte_carlo(const scenario::Scenario& sc, const SweepConfig& config) {
    sc.validate();
    if (config.packet_counts.empty() || config.field_orders.empty()) {
        throw std::invalid_argument("fogsim: sweep needs at least one K and one q");
    }
    for (unsigned q : config.field_orders) degree_of(q);
    for (unsigned k : config.packet_counts) {
        if (k < 1 || k > config.schedule_max) {
            throw std::invalid_argument("fogsim: sweep K must be in [1, schedule_max]");
        }
    }

    MetricsReport report;
    report.schedule_max = config.schedule_max;
    report.trials = config.trials ? config.trials : sc.trials;
    report.epsilon = config.epsilon > 0.0 ? config.epsilon : sc.epsilon;
    report.rng_seed = sc.rng_seed;

    const bool per_rsu = config.per_rsu_curves && sc.rsus.size() > 1;
    const unsigned threads = std::max(1u, config.threads);

    std::vector<std::vector<std::uint64_t>> dist_attempts(sc.rsus.size());
    std::vector<std::vector<std::uint64_t>> dist_losses(sc.rsus.size());
    std::uint64_t draws_total = 0;
    std::uint64_t losses_total = 0;
    bool first_combo = true;

    for (unsigned packet_count : config.packet_counts) {
        for (unsigned field_order : config.field_orders) {
            const gf::Field field(degree_of(field_order));

            MetricsReport::Curve global;
            global.label = "global";
            global.packet_count = packet_count;
            global.field_order = field_order;
            global.histogram.assign(config.schedule_max + 1, 0);
            std::vector<MetricsReport::Curve> rsu_curves;
            if (per_rsu) {
                for (const auto& r : sc.rsus) {
                    MetricsReport::Curve c;
                    c.label = "rsu" + std::to_string(r.profile.rsu_id);
                    c.packet_count = packet_count;
                    c.field_order = field_order;
                    c.histogram.assign(config.schedule_max + 1, 0);
                    rsu_curves.push_back(std::move(c));
                }
            }

            const auto options_for = [&](std::uint32_t trial) {
                WorldOptions o;
                o.packet_count = packet_count;
                o.schedule = config.schedule_max;
                o.field = field;
                o.rng_seed = channel::mix_seed(sc.rng_seed + trial);
                o.first_message_id = trial * 0x9E3779B1u;
                o.per_rsu_decoders = per_rsu;
                return o;
            };

            const auto fold = [&](const TrialSummary& s) {
                for (const auto& m : s.messages) {
                    ++report.messages_emitted;
                    if (m.recovery_index > 0) ++report.messages_recovered;
                    if (!m.complete) continue;
                    ++report.messages_completed;
                    ++global.messages;
                    if (m.recovery_index > 0) {
                        ++global.histogram[m.recovery_index];
                    } else {
                        ++global.unrecovered;
                    }
                    for (std::size_t r = 0; r < m.rsu_recovery_index.size(); ++r) {
                        ++rsu_curves[r].messages;
                        if (m.rsu_recovery_index[r] > 0) {
                            ++rsu_curves[r].histogram[m.rsu_recovery_index[r]];
                        } else {
                            ++rsu_curves[r].unrecovered;
                        }
                    }
                }
                report.frames_emitted += s.frames_emitted;
                report.frames_delivered += s.frames_delivered;
                report.duplicate_frames += s.duplicates;
                report.forwarded_frames += s.forwarded;
                report.malformed_frames += s.malformed;
                report.payload_mismatches += s.payload_mismatches;
                if (first_combo) {
                    for (std::size_t r = 0; r < s.tallies.size(); ++r) {
                        const RsuTally& t = s.tallies[r];
                        if (dist_attempts[r].size() < t.bin_attempts.size()) {
                            dist_attempts[r].resize(t.bin_attempts.size(), 0);
                            dist_losses[r].resize(t.bin_attempts.size(), 0);
                        }
                        for (std::size_t b = 0; b < t.bin_attempts.size(); ++b) {
                            dist_attempts[r][b] += t.bin_attempts[b];
                            dist_losses[r][b] += t.bin_losses[b];
                        }
                        draws_total += t.attempts;
                        losses_total += t.attempts - t.deliveries;
                    }
                }
            };

            if (threads == 1) {
                for (std::uint32_t trial = 0; trial < report.trials; ++trial) {
                    fold(run_trial(sc, options_for(trial)));
                }
            } else {
                std::vector<TrialSummary> slots(report.trials);
                std::atomic<std::uint32_t> next{0};
                std::vector<std::thread> pool;
                for (unsigned t = 0; t < threads; ++t) {
                    pool.emplace_back([&] {
                        for (std::uint32_t trial = next.fetch_add(1); trial < report.trials;
                             trial = next.fetch_add(1)) {
                            slots[trial] = run_trial(sc, options_for(trial));
                        }
                    });
                }
                for (auto& t : pool) t.join();
                for (const auto& s : slots) fold(s);
            }

            report.curves.push_back(std::move(global));
            for (auto& c : rsu_curves) report.curves.push_back(std::move(c));
            first_combo = false;
        }
    }

    report.average_per =
        draws_total == 0 ? 0.0 : static_cast<double>(losses_total) / static_cast<double>(draws_total);
    for (std::size_t r = 0; r < sc.rsus.size(); ++r) {
        for (std::size_t b = 0; b < dist_attempts[r].size(); ++b) {
            if (dist_attempts[r][b] == 0) continue;
            report.distance_bins.push_back({sc.rsus[r].profile.rsu_id,
                                            static_cast<double>(b) * kDistanceBinM,
                                            static_cast<double>(b + 1) * kDistanceBinM,
                                            dist_attempts[r][b], dist_losses[r][b]});
        }
    }
    return report;
}

namespace {

void write_atomic(const std::filesystem::path& destination, const std::string& name,
                  const std::string& content) {
    std::filesystem::create_directories(destination);
    const std::filesystem::path tmp = destination / ("." + name + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("fogsim: cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("fogsim: short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, destination / name);
}

}  // namespace

void emit_report(const MetricsReport& report, const std::filesystem::path& destination) {
    char row[192];

    std::string curves = "rsu_or_global,K,q,N,empirical_R,analytic_R,trials\n";
    for (const auto& c : report.curves) {
        for (unsigned n = c.packet_count; n <= report.schedule_max; ++n) {
            const double analytic = rlnc::delivery_curve(n, report.average_per, c.packet_count,
                                                         c.field_order);
            std::snprintf(row, sizeof row, "%s,%u,%u,%u,%.6f,%.6f,%u\n", c.label.c_str(),
                          c.packet_count, c.field_order, n, c.empirical_r(n), analytic,
                          report.trials);
            curves += row;
        }
    }
    write_atomic(destination, "recovery_curves.csv", curves);

    std::string bins = "rsu_id,bin_lo_m,bin_hi_m,per\n";
    for (const auto& b : report.distance_bins) {
        std::snprintf(row, sizeof row, "%u,%.1f,%.1f,%.6f\n", b.rsu_id, b.lo_m, b.hi_m, b.per());
        bins += row;
    }
    write_atomic(destination, "per_by_distance.csv", bins);
}

}  // namespace fogcode::fogsim
