#pragma once

#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "weillat/bigint.hpp"
#include "weillat/errors.hpp"

namespace weillat {

/** Valuation of an exact zero. */
inline constexpr long VAL_INF = std::numeric_limits<long>::max() / 2;

/**
 * Arithmetic context for F = Q_p and its unramified quadratic extension
 * E = F[w]/(w^2 + mb*w + mc).  The uniformizer is p itself, so the shift
 * amount e = ord(2) is 1 at p = 2 and 0 otherwise.  K is the number of
 * uniformizer digits every freshly constructed element carries, and r is
 * the exponential conductor of the fixed additive character psi: psi is
 * trivial exactly on P^r.
 */
struct FieldConfig {
    long p;
    int K;
    int r;
    bool quadratic;
    long mb, mc;
    int e;

    static std::shared_ptr<const FieldConfig> make(long p, int K, int r,
                                                   bool quadratic = false,
                                                   long mb = 0, long mc = 0);
};

using FieldConfigPtr = std::shared_ptr<const FieldConfig>;

/**
 * Element of F or E known in the digit window [lo, lo + nd): the value is
 * congruent to p^lo * (a + b*w) mod P^(lo+nd) with 0 <= a, b < p^nd.
 * Exact zeros are flagged; everything else is a residue class, and all
 * operations keep track of how many digits stay certified.  Equality is
 * window agreement after alignment.
 */
class LocalFieldElement {
public:
    LocalFieldElement() = default;

    static LocalFieldElement zero(FieldConfigPtr cfg);
    static LocalFieldElement one(FieldConfigPtr cfg) { return from_int(std::move(cfg), 1); }
    static LocalFieldElement from_int(FieldConfigPtr cfg, const Int& n);
    static LocalFieldElement from_rational(FieldConfigPtr cfg, const Rat& q);
    /** qa + qb*w for exact rationals qa, qb; requires a quadratic config when qb != 0. */
    static LocalFieldElement from_pair(FieldConfigPtr cfg, const Rat& qa, const Rat& qb);
    static LocalFieldElement omega(FieldConfigPtr cfg) { return from_pair(std::move(cfg), 0, 1); }
    /** p^m as an exact element. */
    static LocalFieldElement pi_pow(FieldConfigPtr cfg, long m);
    /** Raw window constructor; digits are reduced into [0, p^nd). */
    static LocalFieldElement from_window(FieldConfigPtr cfg, long lo, int nd, Int a, Int b);

    const FieldConfigPtr& config() const { return cfg_; }
    bool is_exact_zero() const { return zero_; }
    /** True when every certified digit is zero (includes exact zeros). */
    bool is_zero_window() const { return zero_ || (a_ == 0 && b_ == 0); }
    long lo() const { return zero_ ? VAL_INF : lo_; }
    int digits_kept() const { return nd_; }
    const Int& coeff_a() const { return a_; }
    const Int& coeff_b() const { return b_; }

    /** Valuation when the window determines it; VAL_INF for exact zero. */
    long val() const;
    bool val_known() const { return zero_ || !is_zero_window(); }

    LocalFieldElement operator-() const;
    LocalFieldElement operator+(const LocalFieldElement& o) const;
    LocalFieldElement operator-(const LocalFieldElement& o) const { return *this + (-o); }
    LocalFieldElement operator*(const LocalFieldElement& o) const;
    LocalFieldElement inv() const;
    LocalFieldElement operator/(const LocalFieldElement& o) const { return *this * o.inv(); }

    /** Galois conjugate over F: w -> -mb - w; identity on F. */
    LocalFieldElement conj() const;
    LocalFieldElement trace() const { return *this + conj(); }
    LocalFieldElement norm() const { return *this * conj(); }

    /** Multiplication by p^m. */
    LocalFieldElement shifted(long m) const;
    /** Same value, zero leading digits absorbed into lo. */
    LocalFieldElement normalized() const;
    /** Window truncated to at most nd digits. */
    LocalFieldElement truncated(int nd) const;

    /** Window agreement after alignment. */
    bool operator==(const LocalFieldElement& o) const { return (*this - o).is_zero_window(); }
    bool operator!=(const LocalFieldElement& o) const { return !(*this == o); }

    /** Certifies val >= m, or throws precision_exhausted when the window cannot decide. */
    bool ord_ge(long m) const;
    bool is_integral() const { return ord_ge(0); }

    /**
     * The F-rational canonical representative of the digits below position m,
     * sum of d_i p^i over lo <= i < m.  Throws when the window stops short of m
     * or when those digits leave F.
     */
    Rat frac_below(long m) const;
    /** Both coordinate representatives below position m. */
    std::pair<Rat, Rat> frac_pair_below(long m) const;

    std::string str() const;

private:
    FieldConfigPtr cfg_;
    bool zero_ = true;
    long lo_ = 0;
    int nd_ = 0;
    Int a_ = 0, b_ = 0;

    void check_same(const LocalFieldElement& o) const;
};

using Fel = LocalFieldElement;

/**
 * Value of a p-power root of unity: exp(2 pi i num / p^den_pow), reduced so
 * that p does not divide num unless the exponent is 0.  The additive group
 * of these exponents carries every character value psi takes.
 */
struct UnityExponent {
    long p = 0;
    Int num = 0;
    int den_pow = 0;

    UnityExponent() = default;
    UnityExponent(long p_, Int num_, int den_pow_);

    bool is_trivial() const { return num == 0; }
    UnityExponent operator+(const UnityExponent& o) const;
    UnityExponent operator-() const;
    bool operator==(const UnityExponent& o) const {
        return p == o.p && num == o.num && den_pow == o.den_pow;
    }
    bool operator!=(const UnityExponent& o) const { return !(*this == o); }
    std::string str() const;
};

/**
 * psi(x) for x in F, where psi = psi_0(p^-r .) and psi_0 is the standard
 * additive character of Q_p with fractional-part exponent.  psi is trivial
 * exactly on P^r.  Throws precision_exhausted when the window cannot certify
 * x mod P^r.
 */
UnityExponent psi_eval(const LocalFieldElement& x);

/** psi at an exact rational argument, same character. */
UnityExponent psi_eval_rat(const FieldConfig& cfg, const Rat& x);

}  // namespace weillat
