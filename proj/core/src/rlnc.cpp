#include "fogcode/rlnc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fogcode::rlnc {

namespace {

// Appends `count` symbols of `degree` bits read MSB-first from a bit cursor.
class BitReader {
public:
    explicit BitReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    // Reads up to `bits` bits; missing bits past the end read as zero.
    unsigned read(unsigned bits) {
        unsigned v = 0;
        for (unsigned i = 0; i < bits; ++i) {
            v <<= 1;
            const std::size_t byte = pos_ >> 3;
            if (byte < bytes_.size()) {
                v |= (static_cast<unsigned>(bytes_[byte]) >> (7 - (pos_ & 7))) & 1u;
            }
            ++pos_;
        }
        return v;
    }

private:
    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

class BitWriter {
public:
    explicit BitWriter(std::size_t total_bits)
        : out_((total_bits + 7) / 8, std::byte{0}) {}

    void write(unsigned value, unsigned bits) {
        for (unsigned i = 0; i < bits; ++i) {
            if ((value >> (bits - 1 - i)) & 1u) {
                out_[pos_ >> 3] |= std::byte{1} << (7 - (pos_ & 7));
            }
            ++pos_;
        }
    }

    std::vector<std::byte> take() { return std::move(out_); }

private:
    std::vector<std::byte> out_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> pack_symbols(std::span<const gf::Symbol> symbols, unsigned degree) {
    BitWriter w(symbols.size() * degree);
    for (gf::Symbol s : symbols) {
        w.write(s, degree);
    }
    return w.take();
}

std::vector<gf::Symbol> unpack_symbols(std::span<const std::byte> bytes, unsigned degree,
                                       std::size_t count) {
    if (bytes.size() * 8 < count * degree) {
        throw std::invalid_argument("unpack_symbols: byte buffer too short");
    }
    BitReader r(bytes);
    std::vector<gf::Symbol> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = static_cast<gf::Symbol>(r.read(degree));
    }
    return out;
}

std::size_t generation_capacity_bytes(std::size_t packet_count, std::size_t packet_symbols,
                                      unsigned degree) {
    return packet_count * packet_symbols * degree / 8;
}

Generation segment(std::span<const std::byte> data, std::size_t packet_count,
                   std::size_t packet_symbols, const gf::Field& field,
                   std::uint32_t message_id) {
    if (packet_count < 1 || packet_symbols < 1) {
        throw std::invalid_argument("segment: K and L must both be at least 1");
    }
    const std::size_t capacity_bits = packet_count * packet_symbols * field.degree();
    if (data.size() * 8 > capacity_bits) {
        throw std::invalid_argument(
            "segment: " + std::to_string(data.size()) + " bytes exceed the " +
            std::to_string(capacity_bits) + "-bit generation capacity");
    }

    Generation gen{.message_id = message_id,
                   .packet_count = packet_count,
                   .packet_symbols = packet_symbols,
                   .payload_bytes = data.size(),
                   .field = field,
                   .packets = {}};
    gen.packets.reserve(packet_count);
    BitReader r(data);
    for (std::size_t i = 0; i < packet_count; ++i) {
        std::vector<gf::Symbol> pkt(packet_symbols);
        for (std::size_t j = 0; j < packet_symbols; ++j) {
            pkt[j] = static_cast<gf::Symbol>(r.read(field.degree()));
        }
        gen.packets.push_back(std::move(pkt));
    }
    return gen;
}

std::vector<std::byte> desegment(const Generation& gen) {
    std::vector<gf::Symbol> flat;
    flat.reserve(gen.packet_count * gen.packet_symbols);
    for (const auto& pkt : gen.packets) {
        flat.insert(flat.end(), pkt.begin(), pkt.end());
    }
    std::vector<std::byte> bytes = pack_symbols(flat, gen.field.degree());
    bytes.resize(gen.payload_bytes);
    return bytes;
}

CodingVector coding_vector_from_seed(std::uint32_t seed, std::size_t packet_count,
                                     const gf::Field& field) {
    Xorshift32 prng(seed);
    CodingVector v;
    v.coefficients.resize(packet_count);
    const std::uint32_t mask = field.order() - 1;
    for (std::size_t i = 0; i < packet_count; ++i) {
        v.coefficients[i] = static_cast<gf::Symbol>(prng.next() & mask);
    }
    return v;
}

CodedPacket encode(const Generation& gen, std::uint32_t seed) {
    const CodingVector g = coding_vector_from_seed(seed, gen.packet_count, gen.field);
    CodedPacket pkt{.message_id = gen.message_id, .seed = seed, .payload = {}};
    pkt.payload.assign(gen.packet_symbols, 0);
    for (std::size_t i = 0; i < gen.packet_count; ++i) {
        const gf::Symbol gi = g.coefficients[i];
        if (gi == 0) {
            continue;
        }
        const auto& src = gen.packets[i];
        for (std::size_t l = 0; l < gen.packet_symbols; ++l) {
            pkt.payload[l] ^= gen.field.mul(gi, src[l]);
        }
    }
    return pkt;
}

Decoder::Decoder(std::uint32_t message_id, std::size_t packet_count,
                 std::size_t packet_symbols, gf::Field field)
    : message_id_(message_id),
      packet_count_(packet_count),
      packet_symbols_(packet_symbols),
      field_(std::move(field)) {
    if (packet_count < 1 || packet_symbols < 1) {
        throw std::invalid_argument("decoder: K and L must both be at least 1");
    }
    rows_.reserve(packet_count);
}

bool Decoder::ingest(const CodedPacket& pkt) {
    if (pkt.message_id != message_id_) {
        throw std::invalid_argument("decoder: packet message id " +
                                    std::to_string(pkt.message_id) +
                                    " does not match decoder message id " +
                                    std::to_string(message_id_));
    }
    if (pkt.payload.size() != packet_symbols_) {
        throw std::invalid_argument("decoder: payload has " +
                                    std::to_string(pkt.payload.size()) +
                                    " symbols, expected " +
                                    std::to_string(packet_symbols_));
    }
    if (complete()) {
        return false;
    }

    std::vector<gf::Symbol> coeffs =
        coding_vector_from_seed(pkt.seed, packet_count_, field_).coefficients;
    std::vector<gf::Symbol> payload = pkt.payload;

    // Eliminate against every stored pivot.
    for (const Row& row : rows_) {
        const gf::Symbol c = coeffs[row.pivot];
        if (c == 0) {
            continue;
        }
        for (std::size_t i = 0; i < packet_count_; ++i) {
            coeffs[i] ^= field_.mul(c, row.coeffs[i]);
        }
        for (std::size_t i = 0; i < packet_symbols_; ++i) {
            payload[i] ^= field_.mul(c, row.payload[i]);
        }
    }

    const auto pivot_it = std::find_if(coeffs.begin(), coeffs.end(),
                                       [](gf::Symbol s) { return s != 0; });
    if (pivot_it == coeffs.end()) {
        return false;  // duplicate or linearly dependent
    }
    const std::size_t pivot = static_cast<std::size_t>(pivot_it - coeffs.begin());

    // Normalize the new row to a unit pivot.
    const gf::Symbol scale = field_.inv(coeffs[pivot]);
    if (scale != 1) {
        for (auto& c : coeffs) {
            c = field_.mul(scale, c);
        }
        for (auto& p : payload) {
            p = field_.mul(scale, p);
        }
    }

    // Back-eliminate the new pivot column from the stored rows so the
    // whole system stays in reduced row-echelon form.
    for (Row& row : rows_) {
        const gf::Symbol c = row.coeffs[pivot];
        if (c == 0) {
            continue;
        }
        for (std::size_t i = 0; i < packet_count_; ++i) {
            row.coeffs[i] ^= field_.mul(c, coeffs[i]);
        }
        for (std::size_t i = 0; i < packet_symbols_; ++i) {
            row.payload[i] ^= field_.mul(c, payload[i]);
        }
    }

    Row row{.coeffs = std::move(coeffs), .payload = std::move(payload), .pivot = pivot};
    const auto pos = std::find_if(rows_.begin(), rows_.end(),
                                  [pivot](const Row& r) { return r.pivot > pivot; });
    rows_.insert(pos, std::move(row));
    return true;
}

std::optional<std::vector<std::vector<gf::Symbol>>> Decoder::recover() const {
    if (!complete()) {
        return std::nullopt;
    }
    // At full rank the reduced row-echelon matrix is the identity and row i
    // holds source packet i verbatim.
    std::vector<std::vector<gf::Symbol>> packets;
    packets.reserve(packet_count_);
    for (const Row& row : rows_) {
        packets.push_back(row.payload);
    }
    return packets;
}

std::optional<std::vector<std::byte>> Decoder::recover_bytes(std::size_t payload_bytes) const {
    auto packets = recover();
    if (!packets) {
        return std::nullopt;
    }
    std::vector<gf::Symbol> flat;
    flat.reserve(packet_count_ * packet_symbols_);
    for (const auto& pkt : *packets) {
        flat.insert(flat.end(), pkt.begin(), pkt.end());
    }
    std::vector<std::byte> bytes = pack_symbols(flat, field_.degree());
    if (payload_bytes > bytes.size()) {
        throw std::invalid_argument("recover_bytes: payload_bytes exceeds generation capacity");
    }
    bytes.resize(payload_bytes);
    return bytes;
}

double recovery_probability(std::size_t n, std::size_t packet_count, unsigned q) {
    if (packet_count < 1) {
        throw std::invalid_argument("recovery_probability: K must be at least 1");
    }
    if (q < 2 || (q & (q - 1)) != 0) {
        throw std::invalid_argument("recovery_probability: q must be a power of 2");
    }
    if (n < packet_count) {
        return 0.0;
    }
    double r = 1.0;
    for (std::size_t t = 0; t < packet_count; ++t) {
        r *= 1.0 - std::pow(static_cast<double>(q), -static_cast<double>(n - t));
    }
    return r;
}

double delivery_curve(std::size_t transmissions, double per, std::size_t packet_count,
                      unsigned q) {
    if (per < 0.0 || per > 1.0) {
        throw std::invalid_argument("delivery_curve: per must be in [0, 1]");
    }
    if (per == 0.0) {
        return recovery_probability(transmissions, packet_count, q);
    }
    if (per == 1.0) {
        return recovery_probability(0, packet_count, q);
    }
    // Binomial weights built iteratively: w(0) = per^N, then
    // w(n+1)/w(n) = (N-n)/(n+1) * (1-per)/per. Work in logs to survive
    // large N with tiny per^N.
    const double N = static_cast<double>(transmissions);
    double log_w = N * std::log(per);
    const double log_ratio_base = std::log1p(-per) - std::log(per);
    double acc = 0.0;
    for (std::size_t n = 0; n <= transmissions; ++n) {
        if (n >= packet_count) {
            acc += std::exp(log_w) * recovery_probability(n, packet_count, q);
        }
        if (n < transmissions) {
            log_w += std::log((N - static_cast<double>(n)) / (static_cast<double>(n) + 1.0)) +
                     log_ratio_base;
        }
    }
    return std::min(acc, 1.0);
}

}  // namespace fogcode::rlnc
