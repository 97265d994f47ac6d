#include "fogcode/gf.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace fogcode::gf {

namespace {

// Degree of a GF(2) polynomial given as a bit mask, -1 for the zero polynomial.
int poly_degree(unsigned p) {
    return p == 0 ? -1 : std::bit_width(p) - 1;
}

// Remainder of a mod b over GF(2).
unsigned poly_mod(unsigned a, unsigned b) {
    const int db = poly_degree(b);
    for (int da = poly_degree(a); da >= db; da = poly_degree(a)) {
        a ^= b << (da - db);
    }
    return a;
}

// Carry-less multiply of a and b, reduced modulo poly.
Symbol clmul_reduce(unsigned a, unsigned b, unsigned poly) {
    unsigned acc = 0;
    for (unsigned i = 0; b >> i; ++i) {
        if ((b >> i) & 1u) {
            acc ^= a << i;
        }
    }
    return static_cast<Symbol>(poly_mod(acc, poly));
}

}  // namespace

unsigned Field::default_poly(unsigned degree) {
    // x+1, x^2+x+1, x^3+x+1, x^4+x+1, x^5+x^2+1, x^6+x+1, x^7+x+1,
    // x^8+x^4+x^3+x^2+1
    static constexpr unsigned kDefaults[9] = {0,    0x3,  0x7,  0xB, 0x13,
                                              0x25, 0x43, 0x83, 0x11D};
    if (degree < 1 || degree > 8) {
        throw std::invalid_argument("gf: extension degree must be in [1, 8], got " +
                                    std::to_string(degree));
    }
    return kDefaults[degree];
}

bool Field::is_irreducible(unsigned poly) {
    const int deg = poly_degree(poly);
    if (deg < 1) {
        return false;
    }
    if (deg == 1) {
        return true;  // x and x+1 have no nontrivial divisors
    }
    // Trial division by every polynomial of degree 1 .. deg-1.
    for (unsigned d = 2u; poly_degree(d) < deg; ++d) {
        if (poly_mod(poly, d) == 0) {
            return false;
        }
    }
    return true;
}

Field::Field(unsigned degree) : Field(degree, default_poly(degree)) {}

Field::Field(unsigned degree, unsigned poly) {
    if (degree < 1 || degree > 8) {
        throw std::invalid_argument("gf: extension degree must be in [1, 8], got " +
                                    std::to_string(degree));
    }
    if (poly_degree(poly) != static_cast<int>(degree)) {
        throw std::invalid_argument("gf: reduction polynomial 0x" +
                                    std::to_string(poly) +
                                    " is not monic of degree " +
                                    std::to_string(degree));
    }
    if (!is_irreducible(poly)) {
        throw std::invalid_argument("gf: reduction polynomial is reducible over GF(2)");
    }

    auto t = std::make_shared<Tables>();
    t->degree = degree;
    t->order = 1u << degree;
    t->poly = poly;
    t->mul.resize(static_cast<std::size_t>(t->order) * t->order);
    for (unsigned a = 0; a < t->order; ++a) {
        for (unsigned b = a; b < t->order; ++b) {
            const Symbol p = clmul_reduce(a, b, poly);
            t->mul[static_cast<std::size_t>(a) * t->order + b] = p;
            t->mul[static_cast<std::size_t>(b) * t->order + a] = p;
            if (p == 1) {
                t->inv[a] = static_cast<Symbol>(b);
                t->inv[b] = static_cast<Symbol>(a);
            }
        }
    }
    tables_ = std::move(t);
}

Symbol Field::inv(Symbol a) const {
    if (a == 0) {
        throw std::domain_error("gf: no inverse for zero");
    }
    return tables_->inv[a];
}

}  // namespace fogcode::gf
