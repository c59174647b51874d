#pragma once

#include <string>
#include <vector>

#include "weillat/bigint.hpp"
#include "weillat/localfield.hpp"

namespace weillat {

/**
 * Exact element of the p^level-th cyclotomic field Q(zeta), stored as
 * rational coordinates in the power basis 1, zeta, ..., zeta^(phi-1) with
 * phi = phi(p^level), reduced modulo the cyclotomic polynomial.  The level
 * grows lazily to whatever the operands need, so sums of character values
 * and the resulting Gauss sums stay bit-exact.
 */
class CyclotomicScalar {
public:
    CyclotomicScalar() = default;

    static CyclotomicScalar zero(long p) { return CyclotomicScalar(p, 0, {Rat(0)}); }
    static CyclotomicScalar one(long p) { return CyclotomicScalar(p, 0, {Rat(1)}); }
    static CyclotomicScalar from_rat(long p, const Rat& q) { return CyclotomicScalar(p, 0, {q}); }
    /** zeta_{p^level}^power. */
    static CyclotomicScalar root_of_unity(long p, int level, const Int& power);
    static CyclotomicScalar from_unity(const UnityExponent& u) {
        return root_of_unity(u.p, u.den_pow, u.num);
    }

    long prime() const { return p_; }
    int level() const { return level_; }
    const std::vector<Rat>& coeffs() const { return c_; }

    CyclotomicScalar operator+(const CyclotomicScalar& o) const;
    CyclotomicScalar operator-(const CyclotomicScalar& o) const;
    CyclotomicScalar operator-() const;
    CyclotomicScalar operator*(const CyclotomicScalar& o) const;
    CyclotomicScalar scaled(const Rat& q) const;
    /** Involution zeta -> zeta^-1. */
    CyclotomicScalar conj() const;

    bool is_zero() const;
    bool operator==(const CyclotomicScalar& o) const { return (*this - o).is_zero(); }
    bool operator!=(const CyclotomicScalar& o) const { return !(*this == o); }

    /** The rational value when the element lies in Q. */
    bool rational_value(Rat* out) const;

    std::string str() const;

private:
    long p_ = 0;
    int level_ = 0;
    std::vector<Rat> c_;  // size phi(p^level); phi(p^0) = 1

    CyclotomicScalar(long p, int level, std::vector<Rat> c)
        : p_(p), level_(level), c_(std::move(c)) {}

    long phi() const;
    CyclotomicScalar at_level(int level) const;
    /** Adds q * zeta^e into coords, 0 <= e < p^level. */
    static void accumulate(std::vector<Rat>& c, long p, int level, const Int& e, const Rat& q);
};

using Cyc = CyclotomicScalar;

}  // namespace weillat
