#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "weillat/linalg.hpp"
#include "weillat/residue.hpp"

namespace weillat {

// Index sets of the ambient basis spanning the isotropic-plus, anisotropic,
// and isotropic-minus parts.
struct SplitData {
    std::vector<int> plus, aniso, minus;
};

// An epsilon-Hermitian space: form(v, v') is linear in v, conjugate-linear
// in v', with form(v, v') = epsilon * conj(form(v', v)).
struct HermitianSpace {
    FieldConfigPtr cfg;
    FormKind kind = FormKind::symplectic;
    int epsilon = -1;
    int dim = 0;
    Mat gram;  // gram[i][j] = form(basis_i, basis_j)
    std::optional<SplitData> split;

    Fel form(const Vec& v, const Vec& w) const { return pairing(gram, v, w); }

    static std::shared_ptr<const HermitianSpace> make(
        FieldConfigPtr cfg, FormKind kind, int epsilon, const Mat& gram,
        std::optional<SplitData> split = std::nullopt);
};

using SpacePtr = std::shared_ptr<const HermitianSpace>;

// Free full-rank module over the valuation ring, stored by its canonical
// basis matrix.  Equality of lattices is equality of the canonical form.
class Lattice {
public:
    Lattice() = default;
    static Lattice from_basis(SpacePtr s, const Mat& basis);
    static Lattice from_generators(SpacePtr s, const Mat& gens);
    static Lattice standard(SpacePtr s);

    const SpacePtr& space() const { return space_; }
    const Mat& basis() const { return basis_; }
    const Mat& basis_inv() const { return basis_inv_; }
    int dim() const { return basis_.rows(); }

    Vec coords(const Vec& v) const { return mat_apply(basis_inv_, v); }
    Vec from_coords(const Vec& c) const { return mat_apply(basis_, c); }
    bool contains(const Vec& v) const;
    bool contains_lattice(const Lattice& o) const;
    bool operator==(const Lattice& o) const;

    Lattice scaled(long k) const;          // pi^k L
    Lattice sum(const Lattice& o) const;
    Lattice intersect(const Lattice& o) const;
    long index_pow(const Lattice& o) const;  // log_p [this : o] for o inside this
    Mat gram() const;                        // Gram of the basis columns

private:
    SpacePtr space_;
    Mat basis_, basis_inv_;
};

// Isometry of the ambient space, validated against the Gram matrix at
// construction.
struct IsometryElement {
    SpacePtr space;
    Mat matrix;

    static IsometryElement make(SpacePtr s, const Mat& m);
    Vec apply(const Vec& v) const { return mat_apply(matrix, v); }
    IsometryElement compose(const IsometryElement& o) const;  // this after o
    IsometryElement inverse() const;
    Lattice map_lattice(const Lattice& l) const;
};

enum class AnisoVariant { none, unit_line, norm_plane, norm_line };

// The catalog of spaces carrying a self-dual lattice: hyperbolic planes
// pi^r<e_i, f_j> = delta_ij plus the allowed anisotropic tails.  Returns the
// space (with split data) and its standard self-dual lattice.
std::pair<SpacePtr, Lattice> standard_space(FieldConfigPtr cfg, FormKind kind,
                                            int dim, long r,
                                            AnisoVariant variant = AnisoVariant::none,
                                            int epsilon = 0, long eta = 1);

Lattice dual_lattice(const Lattice& l, long r);

// max m with v in pi^m M; VAL_INF for v = 0.
long ord(const Lattice& m, const Vec& v);

bool is_admissible(const Lattice& l);
Vec proj_plus(const SpacePtr& s, const Vec& v);
Vec proj_aniso(const SpacePtr& s, const Vec& v);
Vec proj_minus(const SpacePtr& s, const Vec& v);

// Reduction of a self-dual lattice: L/piL with the form pi^-r<-,-> mod pi.
struct ResidueModel {
    ResidueSpace rs;
    Lattice lattice;
    long r = 0;

    RVec reduce(const Vec& v) const;        // v must lie in the lattice
    Vec lift(const RVec& vbar) const;
};

ResidueModel residue_space(const Lattice& l, long r);

// Coset representatives of big/small, ordered deterministically.
std::vector<Vec> quotient_reps(const Lattice& big, const Lattice& small);

}  // namespace weillat
