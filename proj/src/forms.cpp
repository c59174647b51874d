#include "weillat/forms.hpp"

#include <algorithm>

#include "weillat/errors.hpp"

namespace weillat {

namespace {

long smallest_nonresidue(long p) {
    if (p == 2) return 5;  // 5 generates the unramified quadratic over Q_2
    for (long a = 2; a < p; ++a) {
        // Euler criterion by repeated squaring
        Int x = 1, b = a;
        long ee = (p - 1) / 2;
        while (ee) {
            if (ee & 1) x = x * b % p;
            b = b * b % p;
            ee >>= 1;
        }
        if (x != 1) return a;
    }
    throw config_error("no quadratic nonresidue found");
}

long digit_of(const Fel& x) {
    auto [ra, rb] = x.frac_pair_below(1);
    if (denominator(ra) != 1 || denominator(rb) != 1)
        throw precondition_violated("residue digit of a non-integral element");
    long p = x.config()->p;
    return static_cast<long>(int_mod(numerator(ra), p)) |
           (static_cast<long>(int_mod(numerator(rb), p)) << 32);
}

}  // namespace

std::shared_ptr<const HermitianSpace> HermitianSpace::make(
    FieldConfigPtr cfg, FormKind kind, int epsilon, const Mat& gram,
    std::optional<SplitData> split) {
    auto s = std::make_shared<HermitianSpace>();
    s->cfg = cfg;
    s->kind = kind;
    s->epsilon = epsilon;
    s->dim = gram.rows();
    s->gram = gram;
    s->split = std::move(split);
    if (gram.rows() != gram.cols())
        throw precondition_violated("space: gram not square");
    bool quad = cfg->quadratic;
    bool ok = (kind == FormKind::symplectic && !quad && epsilon == -1) ||
              (kind == FormKind::symmetric && !quad && epsilon == 1) ||
              (kind == FormKind::hermitian && quad && (epsilon == 1 || epsilon == -1));
    if (!ok) throw precondition_violated("space: kind inconsistent with field and sign");
    Fel eps = Fel::from_int(cfg, epsilon);
    for (int i = 0; i < s->dim; ++i)
        for (int j = 0; j < s->dim; ++j)
            if (!(gram.at(i, j) == eps * gram.at(j, i).conj()))
                throw precondition_violated("space: gram lacks the sign symmetry");
    return s;
}

Lattice Lattice::from_basis(SpacePtr s, const Mat& basis) {
    Mat canon = hnf_canonical(basis);
    if (canon.cols() != basis.rows()) throw rank_deficient("lattice basis not full rank");
    Lattice l;
    l.space_ = std::move(s);
    l.basis_ = canon;
    l.basis_inv_ = mat_inverse(canon);
    return l;
}

Lattice Lattice::from_generators(SpacePtr s, const Mat& gens) {
    Mat canon = hnf_canonical(gens);
    if (canon.cols() != gens.rows()) throw rank_deficient("generators do not span");
    return from_basis(std::move(s), canon);
}

Lattice Lattice::standard(SpacePtr s) {
    Mat id = Mat::identity(s->cfg, s->dim);
    return from_basis(std::move(s), id);
}

bool Lattice::contains(const Vec& v) const {
    for (const Fel& c : coords(v))
        if (!c.is_integral()) return false;
    return true;
}

bool Lattice::contains_lattice(const Lattice& o) const {
    for (int j = 0; j < o.basis_.cols(); ++j)
        if (!contains(o.basis_.col(j))) return false;
    return true;
}

bool Lattice::operator==(const Lattice& o) const { return basis_ == o.basis_; }

Lattice Lattice::scaled(long k) const {
    Lattice l;
    l.space_ = space_;
    l.basis_ = basis_.shifted(k);
    l.basis_inv_ = basis_inv_.shifted(-k);
    return l;
}

Lattice Lattice::sum(const Lattice& o) const {
    Mat gens(space_->cfg, dim(), basis_.cols() + o.basis_.cols());
    for (int j = 0; j < basis_.cols(); ++j) gens.set_col(j, basis_.col(j));
    for (int j = 0; j < o.basis_.cols(); ++j)
        gens.set_col(basis_.cols() + j, o.basis_.col(j));
    return from_generators(space_, gens);
}

Lattice Lattice::intersect(const Lattice& o) const {
    Mat a = basis_inv_ * o.basis_;
    SmithForm sf = smith_form(a);
    Mat c = basis_ * sf.u;
    for (size_t i = 0; i < sf.d.size(); ++i)
        if (sf.d[i] > 0) c.set_col(static_cast<int>(i), vec_shift(c.col(static_cast<int>(i)), sf.d[i]));
    return from_basis(space_, c);
}

long Lattice::index_pow(const Lattice& o) const {
    SmithForm sf = smith_form(basis_inv_ * o.basis_);
    long total = 0;
    for (long d : sf.d) {
        if (d < 0) throw not_sublattice("index of a non-sublattice");
        total += d;
    }
    return total * (space_->cfg->quadratic ? 2 : 1);
}

Mat Lattice::gram() const {
    return basis_.transpose() * space_->gram * basis_.conj();
}

IsometryElement IsometryElement::make(SpacePtr s, const Mat& m) {
    if (m.rows() != s->dim || m.cols() != s->dim)
        throw precondition_violated("isometry: wrong shape");
    Mat pulled = m.transpose() * s->gram * m.conj();
    if (!(pulled == s->gram))
        throw precondition_violated("isometry: does not preserve the form");
    return {s, m};
}

IsometryElement IsometryElement::compose(const IsometryElement& o) const {
    return {space, matrix * o.matrix};
}

IsometryElement IsometryElement::inverse() const { return {space, mat_inverse(matrix)}; }

Lattice IsometryElement::map_lattice(const Lattice& l) const {
    return Lattice::from_basis(space, matrix * l.basis());
}

std::pair<SpacePtr, Lattice> standard_space(FieldConfigPtr cfg, FormKind kind,
                                            int dim, long r, AnisoVariant variant,
                                            int epsilon, long eta) {
    if (epsilon == 0)
        epsilon = (kind == FormKind::symplectic) ? -1 : 1;
    if (cfg->quadratic != (kind == FormKind::hermitian))
        throw bad_variant("catalog: field extension inconsistent with kind");

    int aniso_dim = 0;
    switch (variant) {
        case AnisoVariant::none: aniso_dim = 0; break;
        case AnisoVariant::unit_line:
            if (kind != FormKind::symmetric) throw bad_variant("unit line needs a symmetric space");
            aniso_dim = 1;
            break;
        case AnisoVariant::norm_plane:
            if (kind != FormKind::symmetric) throw bad_variant("norm plane needs a symmetric space");
            aniso_dim = 2;
            break;
        case AnisoVariant::norm_line:
            if (kind != FormKind::hermitian) throw bad_variant("norm line needs a hermitian space");
            aniso_dim = 1;
            break;
    }
    if (variant != AnisoVariant::none && r % 2 != 0)
        throw bad_variant("catalog: r must be even with an anisotropic part");
    if ((dim - aniso_dim) % 2 != 0 || dim < aniso_dim)
        throw bad_variant("catalog: dimension does not fit the variant");
    if (kind == FormKind::symplectic && epsilon != -1)
        throw bad_variant("catalog: symplectic sign");
    if (kind == FormKind::symmetric && epsilon != 1)
        throw bad_variant("catalog: symmetric sign");

    int n = (dim - aniso_dim) / 2;
    Mat g(cfg, dim, dim);
    Fel pr = Fel::pi_pow(cfg, r);
    for (int i = 0; i < n; ++i) {
        g.at(i, n + i) = pr;
        g.at(n + i, i) = Fel::from_int(cfg, epsilon) * pr;
    }
    switch (variant) {
        case AnisoVariant::none: break;
        case AnisoVariant::unit_line:
            if (eta % cfg->p == 0) throw bad_variant("catalog: eta must be a unit");
            g.at(2 * n, 2 * n) = Fel::from_int(cfg, eta) * pr;
            break;
        case AnisoVariant::norm_plane: {
            long delta = smallest_nonresidue(cfg->p);
            g.at(2 * n, 2 * n) = pr;
            g.at(2 * n + 1, 2 * n + 1) = Fel::from_int(cfg, -delta) * pr;
            break;
        }
        case AnisoVariant::norm_line:
            if (epsilon == 1) {
                g.at(2 * n, 2 * n) = pr;
            } else {
                // eta = 2 omega + mb satisfies conj(eta) = -eta and is a unit.
                g.at(2 * n, 2 * n) = Fel::from_pair(cfg, cfg->mb, 2) * pr;
            }
            break;
    }

    SplitData split;
    for (int i = 0; i < n; ++i) split.plus.push_back(i);
    for (int i = 0; i < n; ++i) split.minus.push_back(n + i);
    for (int i = 2 * n; i < dim; ++i) split.aniso.push_back(i);

    SpacePtr s = HermitianSpace::make(cfg, kind, epsilon, g, split);
    return {s, Lattice::standard(s)};
}

Lattice dual_lattice(const Lattice& l, long r) {
    Mat m = (l.space()->gram * l.basis().conj()).transpose();
    Mat dual_basis = mat_inverse(m).shifted(r);
    return Lattice::from_basis(l.space(), dual_basis);
}

long ord(const Lattice& m, const Vec& v) { return vec_min_val(m.coords(v)); }

namespace {
const SplitData& need_split(const SpacePtr& s) {
    if (!s->split) throw no_split_data("space has no polarization data");
    return *s->split;
}

Vec keep_coords(const SpacePtr& s, const Vec& v, const std::vector<int>& idx) {
    Vec r = vec_zero(s->cfg, s->dim);
    for (int i : idx) r[i] = v[i];
    return r;
}
}  // namespace

Vec proj_plus(const SpacePtr& s, const Vec& v) { return keep_coords(s, v, need_split(s).plus); }
Vec proj_aniso(const SpacePtr& s, const Vec& v) { return keep_coords(s, v, need_split(s).aniso); }
Vec proj_minus(const SpacePtr& s, const Vec& v) { return keep_coords(s, v, need_split(s).minus); }

bool is_admissible(const Lattice& l) {
    const SplitData& sd = need_split(l.space());
    if (!sd.aniso.empty()) throw no_split_data("admissibility needs a trivial anisotropic part");
    for (int j = 0; j < l.basis().cols(); ++j)
        if (!l.contains(proj_plus(l.space(), l.basis().col(j)))) return false;
    return true;
}

RVec ResidueModel::reduce(const Vec& v) const {
    Vec c = lattice.coords(v);
    RVec out(rs.dim);
    for (int i = 0; i < rs.dim; ++i) {
        if (!c[i].is_integral())
            throw precondition_violated("reduce: vector not in the lattice");
        long packed = digit_of(c[i]);
        out[i] = {packed & 0xffffffffL, packed >> 32};
    }
    return out;
}

Vec ResidueModel::lift(const RVec& vbar) const {
    Vec c = vec_zero(lattice.space()->cfg, rs.dim);
    for (int i = 0; i < rs.dim; ++i)
        c[i] = Fel::from_pair(lattice.space()->cfg, vbar[i].a, vbar[i].b);
    return lattice.from_coords(c);
}

ResidueModel residue_space(const Lattice& l, long r) {
    if (!(dual_lattice(l, r) == l)) throw not_self_dual("residue space needs a self-dual lattice");
    const FieldConfigPtr& cfg = l.space()->cfg;
    ResidueModel rm;
    rm.lattice = l;
    rm.r = r;
    rm.rs.p = cfg->p;
    rm.rs.quadratic = cfg->quadratic;
    rm.rs.mb = ((cfg->mb % cfg->p) + cfg->p) % cfg->p;
    rm.rs.mc = ((cfg->mc % cfg->p) + cfg->p) % cfg->p;
    rm.rs.kind = l.space()->kind;
    rm.rs.epsilon = l.space()->epsilon;
    rm.rs.dim = l.dim();
    Mat lg = l.gram();
    rm.rs.gram.assign(rm.rs.dim, RVec(rm.rs.dim));
    for (int i = 0; i < rm.rs.dim; ++i)
        for (int j = 0; j < rm.rs.dim; ++j) {
            long packed = digit_of(lg.at(i, j).shifted(-r));
            rm.rs.gram[i][j] = {packed & 0xffffffffL, packed >> 32};
        }
    return rm;
}

std::vector<Vec> quotient_reps(const Lattice& big, const Lattice& small) {
    SmithForm sf = smith_form(big.basis_inv() * small.basis());
    Mat c = big.basis() * sf.u;
    const FieldConfigPtr& cfg = big.space()->cfg;
    int n = big.dim();
    if (static_cast<int>(sf.d.size()) != n) throw rank_deficient("quotient of deficient lattices");

    unsigned long long total = 1;
    std::vector<long> radix(n);
    for (int i = 0; i < n; ++i) {
        if (sf.d[i] < 0) throw not_sublattice("quotient of a non-sublattice");
        Int q = int_pow(cfg->p, sf.d[i]);
        if (cfg->quadratic) q *= q;
        if (q > 4'000'000 || total > 4'000'000ULL / static_cast<unsigned long long>(q))
            throw group_too_large("quotient too large to enumerate");
        radix[i] = static_cast<long>(q);
        total *= static_cast<unsigned long long>(radix[i]);
    }

    std::vector<Vec> reps;
    reps.reserve(total);
    for (unsigned long long idx = 0; idx < total; ++idx) {
        unsigned long long rest = idx;
        Vec t = vec_zero(cfg, n);
        for (int i = 0; i < n; ++i) {
            long digit = static_cast<long>(rest % radix[i]);
            rest /= radix[i];
            if (cfg->quadratic) {
                long side = int_pow(cfg->p, sf.d[i]).convert_to<long>();
                t[i] = Fel::from_pair(cfg, digit % side, digit / side);
            } else {
                t[i] = Fel::from_int(cfg, digit);
            }
        }
        reps.push_back(mat_apply(c, t));
    }
    return reps;
}

}  // namespace weillat
