#pragma once

#include <memory>

#include "weillat/forms.hpp"

namespace weillat {

// A symplectic space over the base field together with a choice of
// polarization, the data behind the asymmetric form
//   beta(v, w) = <v_plus, w_minus>,
// which satisfies beta(v, w) - beta(w, v) = <v, w>.  The two halves must be
// totally isotropic of half the dimension.
struct SymplecticSpace {
    SpacePtr sp;
    Mat pplus, pminus;  // coordinate projections; diagonal in the split basis

    static std::shared_ptr<const SymplecticSpace> make(SpacePtr s);

    const FieldConfigPtr& cfg() const { return sp->cfg; }
    int dim() const { return sp->dim; }
    Fel form(const Vec& v, const Vec& w) const { return sp->form(v, w); }
    Fel beta(const Vec& v, const Vec& w) const;
    Mat beta_mat() const;  // beta(v, w) = v^T beta_mat w
};

using SymplPtr = std::shared_ptr<const SymplecticSpace>;

// Element (w, z) of the Heisenberg group attached to beta, with the law
// (w1, z1)(w2, z2) = (w1 + w2, z1 + z2 + beta(w1, w2)).
struct HeisenbergElement {
    SymplPtr space;
    Vec w;
    Fel z;
};

HeisenbergElement hb_identity(const SymplPtr& s);
HeisenbergElement hb_mul(const HeisenbergElement& x, const HeisenbergElement& y);
HeisenbergElement hb_inv(const HeisenbergElement& x);
bool hb_eq(const HeisenbergElement& x, const HeisenbergElement& y);

// True when x commutes with (b, 0) for every ambient basis vector b, i.e.
// when x sits in the center up to window precision.
bool hb_center_test(const HeisenbergElement& x);

// The isomorphism (w, z) -> (w, z - (1/2)<w_plus, w_minus>) onto the
// Heisenberg group of the symmetrized law
// (w1, z1)(w2, z2) = (w1 + w2, z1 + z2 + (1/2)<w1, w2>); the returned
// element is understood in those coordinates, and hb_mul_standard gives
// that law for checking.
HeisenbergElement iso_to_standard(const HeisenbergElement& h);
HeisenbergElement hb_mul_standard(const HeisenbergElement& x, const HeisenbergElement& y);

// A function W -> F of the shape alpha(w) = w^T bmat w.  These are the
// characters of second degree the pseudosymplectic group carries; they are
// closed under sums, negation and pullback by linear maps.
struct SecondDegreeCharacter {
    SymplPtr space;
    Mat bmat;

    Fel value(const Vec& w) const;
    Mat defect() const;  // bmat + bmat^T: the matrix of the bilinear defect
    SecondDegreeCharacter pullback(const Mat& k) const;  // w -> value(k w)
    SecondDegreeCharacter operator+(const SecondDegreeCharacter& o) const;
    SecondDegreeCharacter operator-() const;
};

// Equality as functions: same values on all e_i and e_i + e_j, which pins
// the diagonal and the symmetrized off-diagonal part of bmat.
bool sdc_equal(const SecondDegreeCharacter& a, const SecondDegreeCharacter& b);

SecondDegreeCharacter sdc_zero(const SymplPtr& s);

bool is_symplectic_matrix(const SymplPtr& s, const Mat& g);

// The canonical character attached to a symplectic g with polarization
// blocks a, b, c, d:
//   alpha_g(w) = (1/2)<a w_plus, c w_plus> + (1/2)<b w_minus, d w_minus>
//                + <b w_minus, c w_plus>.
// Its defect is beta(g., g.) - beta(., .), and g -> (g, alpha_g) is a group
// homomorphism into the pairs below.
SecondDegreeCharacter alpha_of(const SymplPtr& s, const Mat& g);

// Pair (g, alpha) with alpha in Sigma_g, under
// (g1, a1)(g2, a2) = (g1 g2, a1 o g2 + a2).  The inverse of (g, alpha_g) is
// (g^-1, alpha^g) with alpha^g = -alpha_g o g^-1, which differs from
// alpha_{g^-1} in general.
struct PsElement {
    SymplPtr space;
    Mat g;
    SecondDegreeCharacter alpha;

    static PsElement make(SymplPtr s, const Mat& g, const SecondDegreeCharacter& alpha);
};

PsElement ps_identity(const SymplPtr& s);
PsElement splitting(const SymplPtr& s, const Mat& g);  // (g, alpha_g)
PsElement ps_mul(const PsElement& a, const PsElement& b);
PsElement ps_inv(const PsElement& a);
bool ps_eq(const PsElement& a, const PsElement& b);

// (g, alpha) . (w, z) = (g w, z + alpha(w)): the action the operators of the
// lattice model are transported through.
HeisenbergElement ps_act_on_heisenberg(const PsElement& p, const HeisenbergElement& h);

}  // namespace weillat
