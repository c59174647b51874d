#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace weillat {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/** p^e for e >= 0. */
inline Int int_pow(long p, long e) {
    if (e < 0) throw std::domain_error("int_pow: negative exponent");
    Int r = 1, b = p;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

/** p-adic valuation of a nonzero integer. */
inline long int_val(Int n, long p) {
    if (n == 0) throw std::domain_error("int_val: zero");
    long v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

/** Floor-style remainder in [0, m). */
inline Int int_mod(const Int& a, const Int& m) {
    Int r = a % m;
    if (r < 0) r += m;
    return r;
}

/** Inverse of a mod m, gcd(a, m) = 1. */
inline Int inv_mod(const Int& a, const Int& m) {
    Int r0 = m, r1 = int_mod(a, m), s0 = 0, s1 = 1;
    while (r1 != 0) {
        Int q = r0 / r1;
        Int r2 = r0 - q * r1;
        Int s2 = s0 - q * s1;
        r0 = r1; r1 = r2;
        s0 = s1; s1 = s2;
    }
    if (r0 != 1) throw std::domain_error("inv_mod: not a unit");
    return int_mod(s0, m);
}

/** p-adic valuation of a nonzero rational. */
inline long rat_val(const Rat& q, long p) {
    if (q == 0) throw std::domain_error("rat_val: zero");
    return int_val(numerator(q), p) - int_val(denominator(q), p);
}

inline bool is_prime(long p) {
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

}  // namespace weillat
