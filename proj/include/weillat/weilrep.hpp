#pragma once

#include <string>
#include <vector>

#include "weillat/cyclotomic.hpp"
#include "weillat/forms.hpp"
#include "weillat/heisenberg.hpp"

namespace weillat {

/**
 * The lattice model attached to a self-dual lattice A compatible with the
 * polarization: functions on W x F supported on finitely many columns
 * (A + w) x F, transforming by f(a + w, 0) = psi(-beta(a, w)) f(w, 0) along
 * the lattice and by psi in the central coordinate.  Every operator below is
 * exact: coefficients live in cyclotomic fields, coset data in lattices.
 */
struct LatticeModel {
    SymplPtr space;
    Lattice A;
    long r = 0;  // conductor of psi, copied from the field config

    static LatticeModel make(SymplPtr s, Lattice a);
};

// One column: the coset A + rep with value coeff at (rep, 0).  rep is the
// canonical representative, so distinct terms are distinct cosets.
struct ModelTerm {
    Vec rep;
    Cyc coeff;
};

struct ModelVector {
    std::vector<ModelTerm> terms;
};

// Representative of w + A whose A-coordinates keep only their digits below
// the unit position; two vectors get the same representative exactly when
// they differ by a lattice element.
Vec coset_rep(const LatticeModel& lm, const Vec& w);

ModelVector model_zero();

// The column vector s_w: supported on (A + w) x F with s_w(w, 0) = 1.
ModelVector make_s(const LatticeModel& lm, const Vec& w);

// f(w, z), by coset reduction and the transformation rule.
Cyc evaluate(const LatticeModel& lm, const ModelVector& f, const Vec& w,
             const Fel& z);

ModelVector mv_add(const ModelVector& a, const ModelVector& b);
ModelVector mv_scale(const Cyc& c, const ModelVector& f);
bool mv_eq(const ModelVector& a, const ModelVector& b);
bool mv_is_zero(const ModelVector& f);

// Right translation (rho(h) f)(x) = f(x h); a homomorphism in h.
ModelVector rho_apply(const LatticeModel& lm, const HeisenbergElement& h,
                      const ModelVector& f);

/**
 * The sublattice A_q = {a in A : q.g a in A and q.alpha(a) in P^r} attached
 * to a pseudosymplectic element, together with a transversal of A modulo it.
 * A_q is a lattice: the defect of q.alpha lands in P^r on pairs from
 * {a : q.g a in A}, so membership is decided coset by coset at a search
 * level pi^k with 2k covering the worst valuation of q.alpha on a basis.
 */
struct StabilizerData {
    Lattice sub;
    std::vector<Vec> transversal;
};
StabilizerData compute_A_g(const LatticeModel& lm, const PsElement& q);

/**
 * The intertwining operator attached to p = (g, alpha_g):
 *
 *   (M_p f)(y, z) = sum_{a in A/A_q} psi(beta(a, y)) f(g^{-1}(a+y), z + alpha^g(a+y)),
 *
 * where q = (g^{-1}, alpha^g) is the pseudosymplectic inverse of p and each
 * coset of A_q = {a in A : g^{-1} a in A, alpha^g(a) in P^r} carries weight
 * one.  That subgroup is exactly the invariance group of the summand, so the
 * sum is independent of the transversal; the support of the result lies in
 * finitely many cosets of A inside gA + A + g(supp f).
 */
ModelVector apply_M(const LatticeModel& lm, const PsElement& p,
                    const ModelVector& f);

// The defining sum of apply_M evaluated at one point, bypassing the
// canonical term map; used to probe well-definedness independently.
Cyc apply_M_value(const LatticeModel& lm, const PsElement& p,
                  const ModelVector& f, const Vec& y, const Fel& z);

// |(gA cap A) / A_q| for q the pseudosymplectic inverse of p: the number of
// nonzero summands of M_p s_0 at the origin, and the square modulus of that
// Gauss scalar.
Int gauss_group_order(const LatticeModel& lm, const PsElement& p);

// g A inside A.
bool gamma_A_member(const LatticeModel& lm, const Mat& g);
// g A inside A and alpha_g integral against psi on A, decided on the basis
// vectors and their pair sums (a quadratic map is determined there).
bool gamma_A_circ_member(const LatticeModel& lm, const Mat& g);

/**
 * A finite subgroup presentation at level pi^level: one exact generator word
 * per residue class of the closure of the generators (and their inverses)
 * modulo pi^level.  Elements are exact matrices, so they may be fed back
 * into the exact operators; the class map is reduction of entries.
 */
struct FiniteLevelGroup {
    FieldConfigPtr cfg;
    long level = 0;
    std::string tag;
    std::vector<Mat> elements;  // breadth-first order, identity first
};

// Breadth-first closure; throws group_too_large past cap elements.
FiniteLevelGroup enumerate_group(const std::vector<Mat>& gens, long level,
                                 std::string tag, long cap = 1000000);

// The same walk truncated to the first count residue classes.
FiniteLevelGroup sample_group(const std::vector<Mat>& gens, long level,
                              std::string tag, long count);

// (1/|grp|) sum_u M_(u, alpha_u) s_w over the enumerated elements.
ModelVector average_s(const LatticeModel& lm, const Vec& w,
                      const FiniteLevelGroup& grp);

// Smallest enumeration level at which averaging the column through w is
// stable: perturbing a group element by pi^level then moves every character
// argument in the sum by an element of P^r only.  Averages taken below this
// level can depend on the chosen lifts.
long sufficient_level(const LatticeModel& lm, const Vec& w);

// True iff psi(-beta(u^{-1}w - w, w) + alpha^u(w)) is trivial for every
// enumerated u with u(A + w) = A + w; equivalent to average_s(w) != 0 over
// the same elements.
bool nonvanishing_test(const LatticeModel& lm, const Vec& w,
                       const FiniteLevelGroup& grp);

}  // namespace weillat
