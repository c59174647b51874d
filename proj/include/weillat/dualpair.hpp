#pragma once

#include <optional>
#include <vector>

#include "weillat/forms.hpp"
#include "weillat/heisenberg.hpp"
#include "weillat/weilrep.hpp"

namespace weillat {

// A pair of spaces (V1, <,>_1), (V2, <,>_2) over the same base field with
// epsilon_1 epsilon_2 = -1 and self-dual lattices L1, L2 at conductors r1,
// r2.  The tensor product W = V1 (x) V2 with
//   <v1 (x) v2, v1' (x) v2'> = <v1, v1'>_1 <v2, v2'>_2
// is symplectic of dimension dim1*dim2, and A = L1 (x) L2 is self-dual at
// r = r1 + r2.  W is polarized along the splitting of one factor:
// along_second gives W^+ = V1 (x) V2^+, along_first gives W^+ = V1^+ (x) V2.
enum class PolarizationType { along_second, along_first };

// Which factor an operation refers to.
enum class PairSide { first, second };

struct DualPairConfig {
    FieldConfigPtr cfg;     // cfg->r must equal r1 + r2
    long r1 = 0, r2 = 0;
    FormKind kind1 = FormKind::symmetric;
    FormKind kind2 = FormKind::symplectic;
    int dim1 = 0, dim2 = 0;
    AnisoVariant variant1 = AnisoVariant::none;
    AnisoVariant variant2 = AnisoVariant::none;
    int epsilon1 = 0, epsilon2 = 0;
    long eta1 = 1, eta2 = 1;
    PolarizationType polarization = PolarizationType::along_second;
};

struct DualPairContext {
    FieldConfigPtr cfg;
    long r1, r2, r;
    PolarizationType polarization;
    SpacePtr v1, v2;
    Lattice l1, l2;
    SymplPtr w;         // the polarized tensor space
    LatticeModel lm;    // lattice model on A = L1 (x) L2
    int dim1, dim2;

    // Tensor basis index of e_i (x) f_j.
    int widx(int i, int j) const { return i * dim2 + j; }

    const SpacePtr& side_space(PairSide s) const {
        return s == PairSide::first ? v1 : v2;
    }
    const Lattice& side_lattice(PairSide s) const {
        return s == PairSide::first ? l1 : l2;
    }
    long side_r(PairSide s) const { return s == PairSide::first ? r1 : r2; }
    // Whether the polarization of W follows this side's own splitting.
    bool along_self(PairSide s) const {
        return (s == PairSide::second) ==
               (polarization == PolarizationType::along_second);
    }
};

// Validates the catalog data and assembles the tensor space, its
// polarization, and the lattice model.  The polarization must split the
// anisotropic-free factor; otherwise IllegalPolarization.
DualPairContext build_context(const DualPairConfig& conf);

// An element of W read three ways: by tensor coordinates, as a
// homomorphism V1 -> V2, and as a homomorphism V2 -> V1.  The two maps
// pair the argument against the corresponding tensor slot:
//   map1(v) = sum <v, v1>_1 v2,  map2(v) = sum <v, v2>_2 v1.
struct TensorVector {
    Vec w;
    Mat hom1;  // dim2 x dim1, coordinates of map1
    Mat hom2;  // dim1 x dim2, coordinates of map2

    Vec map1(const Vec& v) const { return mat_apply(hom1, v); }
    Vec map2(const Vec& v) const { return mat_apply(hom2, v); }
    Vec map_from(PairSide s, const Vec& v) const {
        return s == PairSide::first ? map1(v) : map2(v);
    }
};

TensorVector tensor_vector(const DualPairContext& ctx, const Vec& w);
// v1 (x) v2.
TensorVector simple_tensor(const DualPairContext& ctx, const Vec& v1,
                           const Vec& v2);
// Inverse of the hom1 reading.
TensorVector tensor_from_hom1(const DualPairContext& ctx, const Mat& m);

// B(L) = L^perp (x) L_2 for L a sublattice of L1 (side first), and the
// mirror L_1 (x) L^perp for L inside L2 (side second).  Duals are taken at
// the side conductor; B(L)^perp at level r equals B(L^perp).
Lattice b_of(const DualPairContext& ctx, PairSide side, const Lattice& l);

// The isometry u of one factor acting on W (u (x) 1, resp. 1 (x) u).
Mat embed(const DualPairContext& ctx, PairSide side, const Mat& u);

// Subgroups of the isometry group of one factor cut out by congruence
// conditions against M = L^perp, for L a sublattice of that side's
// self-dual lattice:
//   k        the embedding stabilizes A
//   k_circ   k, and alpha_u takes psi-trivial values on A
//   k_l_circ k_circ and u L = L
//   j        k_l_circ and (u - 1)L^perp <= L
//   h        k_l_circ and (u - 1)L^perp <= L_i
enum class SubgroupTag { k, k_circ, k_l_circ, j, h };

bool subgroup_membership(const DualPairContext& ctx, PairSide side,
                         const Mat& u, SubgroupTag tag, const Lattice& l);

// The scalar by which h in the group tagged `h` acts on the support coset
// A + w for w in B(L): psi(-beta(h^{-1}w - w, w) + alpha^h(w)).  The value
// depends on w only through A + w and is multiplicative in h.
UnityExponent psi_character(const DualPairContext& ctx, PairSide side,
                            const Mat& h, const Vec& w, const Lattice& l);

// Verdict of a finite probe over coset representatives of B(L)/A.
struct ProbeVerdict {
    bool member = false;
    long probe_level = 0;
    bool complete = false;  // the probe covered all of B(L)/A
    long probes = 0;        // cosets tested
    std::optional<Vec> witness;  // a probe with nontrivial character
};

// Membership in the kernel of every psi_character at this L: probes
// representatives of (B(L) cap pi^{-probe_level}A)/A.  A nontrivial value
// refutes membership outright; certifying membership needs the probe to
// exhaust B(L)/A, otherwise ProbeInsufficient.
ProbeVerdict j_circ_membership(const DualPairContext& ctx, PairSide side,
                               const Mat& u, const Lattice& l,
                               long probe_level);

// c_{x,y}(v) = <v, y> x - epsilon <v, x> y, an element of the isometry Lie
// algebra of the space.
Mat cayley_c(const SpacePtr& s, const Vec& x, const Vec& y);

// u_{x,y} = (1 - c)(1 + c)^{-1} summed as 1 - 2c + 2c^2 - 2c^3 + ...
// The series is evaluated when c contracts the given self-dual lattice
// (c(l) <= pi l); otherwise NotConvergent.  The result is an isometry
// preserving l.
IsometryElement cayley_u(const SpacePtr& s, const Lattice& l, const Vec& x,
                         const Vec& y);

// The four order bounds controlling where u_{x,y} lands.  `general` reads,
// for the first side and thresholds t1 = 1 - r1, t2 = t3 = -r1 - e,
// t4 = -e:
//   i    ord_{L1}(x) + ord_{L1}(y) >= t1
//   ii   ord_L(x) + ord_L(y) >= t2
//   iii  ord_L(x) + ord_{L1}(y) >= t3 and ord_{L1}(x) + ord_L(y) >= t3
//   iv   ord_{L1}(x) + ord_{L2}(w(y)) >= t4 and the (x, y)-swap
// `scaled` (for parallel x = a y on a symplectic side) relaxes every
// threshold by e, and t4 becomes -2e.
enum class CayleyCondition { i, ii, iii, iv };
enum class CayleyVariant { general, scaled };

bool condition_check(const DualPairContext& ctx, PairSide side, const Vec& x,
                     const Vec& y, const TensorVector& w, CayleyCondition which,
                     CayleyVariant variant, const Lattice& l);

// beta(c_{x,y}(w), w) in closed form through the other factor's form:
//   -<w(x), w(y)>          when the polarization ignores this side
//   -(<w(x^+), w(y)> + <w(x), w(y^+)>)   when it follows this side
// Checked against the direct evaluation; mismatch is CertificateFailure.
Fel beta_c_concrete(const DualPairContext& ctx, PairSide side, const Vec& x,
                    const Vec& y, const TensorVector& w);

// alpha^{u_{x,y}}(w) in closed form: zero when the polarization ignores
// this side; otherwise x, y must be pure with branches
//   both plus:  <c(w^-), w^-> = -2<w(x), w(y)>
//   both minus: <w^+, c(w^+)> =  2<w(x), w(y)>
//   mixed:      0.
// Checked against -alpha_u(u^{-1}w); mismatch is CertificateFailure.
Fel alpha_u_concrete(const DualPairContext& ctx, PairSide side, const Vec& x,
                     const Vec& y, const TensorVector& w);

// Verifies beta(u^{-1}w - w, w) = 2 beta(c(w), w) + 4 P^r under conditions
// (i) and (iv) of either variant.
bool beta_u_vs_c_congruence(const DualPairContext& ctx, PairSide side,
                            const Vec& x, const Vec& y, const TensorVector& w);

// (w(pi^{-r1}L1) + L2)^perp, the largest M in V2 with w in L1 (x) M^perp.
Lattice m_w_of(const DualPairContext& ctx, const TensorVector& w);

// Whether L is the largest sublattice of L1 with w in B(L), decided two
// independent ways: the image test w(pi^{-r2}L2) + L1 = L^perp and the
// preimage test that no coset of L in L1 off the origin maps into
// pi^{r1}L2.  Disagreement is CertificateFailure.
bool max_lattice_test(const DualPairContext& ctx, const TensorVector& w,
                      const Lattice& l);

// When the test fails, the strictly larger L' = (w(pi^{-r2}L2) + L1)^perp
// with w in B(L'), checked; WitnessFailure if w is in fact maximal at L.
Lattice max_lattice_witness(const DualPairContext& ctx, const TensorVector& w,
                            const Lattice& l);

}  // namespace weillat
