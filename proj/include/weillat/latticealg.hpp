#pragma once

#include "weillat/forms.hpp"

namespace weillat {

// Lifting problem: perturb the given lattice vectors, each by pi^t_i times a
// lattice vector, until their Gram matrix equals m exactly.  Requires the
// reductions independent, targets ascending with t_i >= 1+e (>= 1 in
// symplectic mode, where diagonal corrections are never needed), and m
// congruent to the current Gram at the stated depths: off-diagonal entries
// mod P^(r + t_min(i,j)), diagonal entries mod P^(r + t_i + e).
struct GramLiftProblem {
    Lattice lattice;  // self-dual with respect to r
    long r = 0;
    std::vector<Vec> vectors;
    std::vector<long> targets;
    Mat m;
    bool symplectic_mode = false;
};

// Completes v_1..v_k (independent mod pi) to a basis of the lattice,
// keeping the given vectors as the first k members.
std::vector<Vec> extend_to_basis(const Lattice& l, const std::vector<Vec>& vs);

// Basis e_1..e_n of l1 such that {pi^exps_i e_i} is a basis of l; exps
// ascending, zero exactly on the first s entries.
struct AdaptedBasis {
    std::vector<Vec> basis;
    std::vector<long> exps;
    int s = 0;
};
AdaptedBasis adapted_basis(const Lattice& l1, const Lattice& l);

// The refinement for admissible sublattices of a self-dual lattice in a
// split space: adapted bases on the plus and minus parts separately.
struct AdaptedBasisSplit {
    AdaptedBasis plus, minus;
};
AdaptedBasisSplit adapted_basis_admissible(const Lattice& l1, const Lattice& l);

std::vector<Vec> gram_lift(const GramLiftProblem& pb);

// Perturbs near-isotropic vectors into an exact totally isotropic X, finds a
// paired totally isotropic Y and the orthogonal core, and splits the lattice
// accordingly.  x, y, core are O-bases of the three lattice pieces; the x_i
// pair with the y_j hyperbolically: form(x_i, y_j) = delta_ij pi^r.
struct IsotropicDecomposition {
    std::vector<Vec> x, y, core;
};
IsotropicDecomposition isotropic_decompose(const Lattice& l, long r,
                                           const std::vector<Vec>& vs, long t);

// Lattice-preserving isometry u with u(from_i) = to_i, given exactly equal
// Gram matrices and independent reductions on both sides.
IsometryElement witt_extend(const Lattice& l, long r, const std::vector<Vec>& from,
                            const std::vector<Vec>& to);

// Residue-field halves: extend a partial isometry given on independent
// families, and produce a paired isotropic complement with the orthogonal
// core.  finite_witt returns the images of the standard residue basis;
// finite_isotropic_complement normalizes form(x_i, y_j) = delta_ij.
std::vector<RVec> finite_witt(const ResidueSpace& rs, const std::vector<RVec>& from,
                              const std::vector<RVec>& to);
struct FiniteIsoComplement {
    std::vector<RVec> y, core;
};
FiniteIsoComplement finite_isotropic_complement(const ResidueSpace& rs,
                                                const std::vector<RVec>& xbar);

// Solves a + epsilon * conj(a) = n exactly (n must have the matching
// conjugation symmetry); used for isotropy repairs without dividing by two
// in the ramified-sensitive cases.
Fel conj_solve(const FieldConfigPtr& cfg, const Fel& n, int epsilon);

}  // namespace weillat
