#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace fogcode::gf {

/// One element of GF(2^m), valid values are [0, 2^m - 1].
using Symbol = std::uint8_t;

/// Binary extension field GF(2^m) for m in [1, 8].
///
/// The reduction polynomial is encoded as an integer whose bit i is the
/// coefficient of x^i; it must be monic of degree m and irreducible over
/// GF(2) (checked at construction by exhaustive trial division).
///
/// Multiplication and inversion are table lookups built once at
/// construction. Instances are immutable and cheap to copy; copies share
/// the tables.
class Field {
public:
    /// Field with the conventional default polynomial for the degree.
    explicit Field(unsigned degree);
    Field(unsigned degree, unsigned poly);

    unsigned degree() const { return tables_->degree; }
    unsigned order() const { return tables_->order; }   // q = 2^m
    unsigned poly() const { return tables_->poly; }

    /// Characteristic-2 addition: bitwise XOR. Self-inverse.
    Symbol add(Symbol a, Symbol b) const { return a ^ b; }
    Symbol sub(Symbol a, Symbol b) const { return a ^ b; }

    Symbol mul(Symbol a, Symbol b) const {
        return tables_->mul[static_cast<std::size_t>(a) * tables_->order + b];
    }

    /// Multiplicative inverse; throws std::domain_error for zero.
    Symbol inv(Symbol a) const;

    Symbol div(Symbol a, Symbol b) const { return mul(a, inv(b)); }

    bool operator==(const Field& other) const {
        return degree() == other.degree() && poly() == other.poly();
    }

    /// Fixed default reduction polynomial for each degree 1..8.
    /// m=8 uses 0x11D, the conventional erasure-coding choice.
    static unsigned default_poly(unsigned degree);

    /// Exhaustive trial division over GF(2).
    static bool is_irreducible(unsigned poly);

private:
    struct Tables {
        unsigned degree = 0;
        unsigned order = 0;
        unsigned poly = 0;
        std::vector<Symbol> mul;          // order * order
        std::array<Symbol, 256> inv{};
    };

    std::shared_ptr<const Tables> tables_;
};

}  // namespace fogcode::gf
