#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fogcode/gf.hpp"

namespace fogcode::rlnc {

/// 32-bit xorshift generator (shifts 13/17/5). The state is never zero:
/// seed 0 is remapped to kSeedRemap at construction. Both ends of a link
/// must run this exact generator for coding vectors to be reproducible.
class Xorshift32 {
public:
    static constexpr std::uint32_t kSeedRemap = 0x9E3779B9u;

    explicit Xorshift32(std::uint32_t seed)
        : state_(seed == 0 ? kSeedRemap : seed) {}

    std::uint32_t next() {
        std::uint32_t s = state_;
        s ^= s << 13;
        s ^= s >> 17;
        s ^= s << 5;
        state_ = s;
        return s;
    }

    std::uint32_t state() const { return state_; }

private:
    std::uint32_t state_;
};

/// One source message: K source packets of L symbols each over one field.
/// payload_bytes records the original data length; it travels out-of-band
/// (generation metadata, not the wire format).
struct Generation {
    std::uint32_t message_id = 0;
    std::size_t packet_count = 0;     // K
    std::size_t packet_symbols = 0;   // L
    std::size_t payload_bytes = 0;
    gf::Field field;
    std::vector<std::vector<gf::Symbol>> packets;  // K rows of L symbols
};

/// The K coefficients g_1..g_K combining source packets into one coded packet.
struct CodingVector {
    std::vector<gf::Symbol> coefficients;
};

/// Over-the-air unit before wire framing: the seed reproduces the coding
/// vector at any receiver equipped with the same PRNG.
struct CodedPacket {
    std::uint32_t message_id = 0;
    std::uint32_t seed = 0;
    std::vector<gf::Symbol> payload;  // L symbols
};

/// Pack symbols of m bits each into bytes, MSB-first. For m = 8 this is the
/// identity. Trailing pad bits are zero.
std::vector<std::byte> pack_symbols(std::span<const gf::Symbol> symbols, unsigned degree);

/// Inverse of pack_symbols; reads exactly `count` symbols.
/// Throws std::invalid_argument if `bytes` is too short.
std::vector<gf::Symbol> unpack_symbols(std::span<const std::byte> bytes, unsigned degree,
                                       std::size_t count);

/// Number of whole bytes a K x L generation can carry: floor(K*L*m / 8).
std::size_t generation_capacity_bytes(std::size_t packet_count, std::size_t packet_symbols,
                                      unsigned degree);

/// Split data symbol-wise into K packets of L symbols, zero-padding the
/// tail. Throws std::invalid_argument if data exceeds the K*L*m bit
/// capacity or K or L is zero.
Generation segment(std::span<const std::byte> data, std::size_t packet_count,
                   std::size_t packet_symbols, const gf::Field& field,
                   std::uint32_t message_id);

/// Exact inverse of segment for the recorded payload_bytes.
std::vector<std::byte> desegment(const Generation& gen);

/// Derive the K-coefficient coding vector from a packet seed: K successive
/// PRNG outputs, each reduced mod 2^m. All-zero vectors are possible and
/// are not resampled.
CodingVector coding_vector_from_seed(std::uint32_t seed, std::size_t packet_count,
                                     const gf::Field& field);

/// c = sum_i g_i * s_i with g derived from the seed.
CodedPacket encode(const Generation& gen, std::uint32_t seed);

/// Incremental decoder: keeps received rows in reduced row-echelon form and
/// reports rank. Packets arrive one at a time, possibly duplicated, from
/// any number of RSUs.
class Decoder {
public:
    Decoder(std::uint32_t message_id, std::size_t packet_count, std::size_t packet_symbols,
            gf::Field field);

    /// Regenerates the coding vector from pkt.seed, eliminates it against
    /// the stored rows, and stores it if it is innovative. Returns true
    /// iff the rank increased. Throws std::invalid_argument on a
    /// message-id or payload-length mismatch.
    bool ingest(const CodedPacket& pkt);

    std::size_t rank() const { return rows_.size(); }
    bool complete() const { return rank() == packet_count_; }
    std::uint32_t message_id() const { return message_id_; }

    /// The K source packets once rank reached K, otherwise nullopt.
    std::optional<std::vector<std::vector<gf::Symbol>>> recover() const;

    /// recover() followed by symbol unpacking into the original bytes.
    std::optional<std::vector<std::byte>> recover_bytes(std::size_t payload_bytes) const;

private:
    struct Row {
        std::vector<gf::Symbol> coeffs;
        std::vector<gf::Symbol> payload;
        std::size_t pivot = 0;
    };

    std::uint32_t message_id_;
    std::size_t packet_count_;
    std::size_t packet_symbols_;
    gf::Field field_;
    std::vector<Row> rows_;  // sorted by pivot, reduced row-echelon form
};

/// Probability that n received coded packets decode a K-packet generation
/// over GF(q): 0 for n < K, else prod_{t=0}^{K-1} (1 - q^-(n-t)).
/// Exact for uniformly random coefficient matrices.
double recovery_probability(std::size_t n, std::size_t packet_count, unsigned q);

/// Recovery probability after N transmissions through an erasure channel
/// that loses each packet independently with probability per:
/// sum_n C(N,n) (1-per)^n per^(N-n) R(n).
double delivery_curve(std::size_t transmissions, double per, std::size_t packet_count,
                      unsigned q);

}  // namespace fogcode::rlnc
