#include "weillat/heisenberg.hpp"

#include "weillat/errors.hpp"

namespace weillat {

namespace {

bool settled(const Fel& x) { return x.is_exact_zero() || x.is_zero_window(); }

Fel half(const FieldConfigPtr& cfg) { return Fel::from_rational(cfg, Rat(1, 2)); }

void same_space(const SymplPtr& a, const SymplPtr& b) {
    if (a != b) throw precondition_violated("elements live on different spaces");
}

}  // namespace

std::shared_ptr<const SymplecticSpace> SymplecticSpace::make(SpacePtr s) {
    if (s->kind != FormKind::symplectic || s->cfg->quadratic)
        throw precondition_violated("polarized space must be symplectic over the base field");
    if (!s->split) throw no_split_data("polarization missing");
    const SplitData& sd = *s->split;
    if (!sd.aniso.empty() || sd.plus.size() != sd.minus.size() ||
        static_cast<int>(sd.plus.size() + sd.minus.size()) != s->dim)
        throw precondition_violated("polarization does not halve the space");
    for (int i : sd.plus)
        for (int j : sd.plus)
            if (!settled(s->gram.at(i, j)))
                throw precondition_violated("plus half not isotropic");
    for (int i : sd.minus)
        for (int j : sd.minus)
            if (!settled(s->gram.at(i, j)))
                throw precondition_violated("minus half not isotropic");

    auto out = std::make_shared<SymplecticSpace>();
    out->sp = s;
    out->pplus = Mat(s->cfg, s->dim, s->dim);
    out->pminus = Mat(s->cfg, s->dim, s->dim);
    for (int i : sd.plus) out->pplus.at(i, i) = Fel::one(s->cfg);
    for (int i : sd.minus) out->pminus.at(i, i) = Fel::one(s->cfg);
    return out;
}

Fel SymplecticSpace::beta(const Vec& v, const Vec& w) const {
    return sp->form(mat_apply(pplus, v), mat_apply(pminus, w));
}

Mat SymplecticSpace::beta_mat() const { return pplus * sp->gram * pminus; }

HeisenbergElement hb_identity(const SymplPtr& s) {
    return {s, vec_zero(s->cfg(), s->dim()), Fel::zero(s->cfg())};
}

HeisenbergElement hb_mul(const HeisenbergElement& x, const HeisenbergElement& y) {
    same_space(x.space, y.space);
    return {x.space, vec_add(x.w, y.w), x.z + y.z + x.space->beta(x.w, y.w)};
}

HeisenbergElement hb_inv(const HeisenbergElement& x) {
    return {x.space, vec_neg(x.w), -x.z + x.space->beta(x.w, x.w)};
}

bool hb_eq(const HeisenbergElement& x, const HeisenbergElement& y) {
    same_space(x.space, y.space);
    return vec_eq(x.w, y.w) && x.z == y.z;
}

bool hb_center_test(const HeisenbergElement& x) {
    const FieldConfigPtr& cfg = x.space->cfg();
    for (int i = 0; i < x.space->dim(); ++i) {
        Vec b = vec_zero(cfg, x.space->dim());
        b[i] = Fel::one(cfg);
        HeisenbergElement probe{x.space, b, Fel::zero(cfg)};
        if (!(hb_mul(x, probe).z == hb_mul(probe, x).z)) return false;
    }
    return true;
}

HeisenbergElement iso_to_standard(const HeisenbergElement& h) {
    const SymplecticSpace& s = *h.space;
    Fel corr = half(s.cfg()) * s.form(mat_apply(s.pplus, h.w), mat_apply(s.pminus, h.w));
    return {h.space, h.w, h.z - corr};
}

HeisenbergElement hb_mul_standard(const HeisenbergElement& x, const HeisenbergElement& y) {
    same_space(x.space, y.space);
    return {x.space, vec_add(x.w, y.w),
            x.z + y.z + half(x.space->cfg()) * x.space->form(x.w, y.w)};
}

Fel SecondDegreeCharacter::value(const Vec& w) const { return pairing(bmat, w, w); }

Mat SecondDegreeCharacter::defect() const { return bmat + bmat.transpose(); }

SecondDegreeCharacter SecondDegreeCharacter::pullback(const Mat& k) const {
    return {space, k.transpose() * bmat * k};
}

SecondDegreeCharacter SecondDegreeCharacter::operator+(const SecondDegreeCharacter& o) const {
    same_space(space, o.space);
    return {space, bmat + o.bmat};
}

SecondDegreeCharacter SecondDegreeCharacter::operator-() const {
    return {space, bmat.scaled(-Fel::one(space->cfg()))};
}

bool sdc_equal(const SecondDegreeCharacter& a, const SecondDegreeCharacter& b) {
    same_space(a.space, b.space);
    int n = a.space->dim();
    for (int i = 0; i < n; ++i) {
        if (!(a.bmat.at(i, i) == b.bmat.at(i, i))) return false;
        for (int j = 0; j < n; ++j)
            if (!(a.bmat.at(i, j) + a.bmat.at(j, i) == b.bmat.at(i, j) + b.bmat.at(j, i)))
                return false;
    }
    return true;
}

SecondDegreeCharacter sdc_zero(const SymplPtr& s) {
    return {s, Mat(s->cfg(), s->dim(), s->dim())};
}

bool is_symplectic_matrix(const SymplPtr& s, const Mat& g) {
    return g.transpose() * s->sp->gram * g == s->sp->gram;
}

SecondDegreeCharacter alpha_of(const SymplPtr& s, const Mat& g) {
    if (!is_symplectic_matrix(s, g))
        throw precondition_violated("matrix does not preserve the form");
    const Mat& gr = s->sp->gram;
    Mat ap = s->pplus * g * s->pplus;
    Mat bm = s->pplus * g * s->pminus;
    Mat cp = s->pminus * g * s->pplus;
    Mat dm = s->pminus * g * s->pminus;
    Mat b = (ap.transpose() * gr * cp + bm.transpose() * gr * dm).scaled(half(s->cfg())) +
            bm.transpose() * gr * cp;
    return {s, b};
}

PsElement PsElement::make(SymplPtr s, const Mat& g, const SecondDegreeCharacter& alpha) {
    same_space(s, alpha.space);
    if (!is_symplectic_matrix(s, g))
        throw precondition_violated("matrix does not preserve the form");
    // membership in Sigma_g: the defect must match beta(g., g.) - beta(., .)
    Mat bb = s->beta_mat();
    if (!(alpha.defect() == g.transpose() * bb * g - bb))
        throw precondition_violated("character defect does not match the matrix");
    return {std::move(s), g, alpha};
}

PsElement ps_identity(const SymplPtr& s) {
    return {s, Mat::identity(s->cfg(), s->dim()), sdc_zero(s)};
}

PsElement splitting(const SymplPtr& s, const Mat& g) {
    return PsElement::make(s, g, alpha_of(s, g));
}

PsElement ps_mul(const PsElement& a, const PsElement& b) {
    same_space(a.space, b.space);
    return {a.space, a.g * b.g, a.alpha.pullback(b.g) + b.alpha};
}

PsElement ps_inv(const PsElement& a) {
    Mat gi = mat_inverse(a.g);
    return {a.space, gi, -a.alpha.pullback(gi)};
}

bool ps_eq(const PsElement& a, const PsElement& b) {
    same_space(a.space, b.space);
    return a.g == b.g && sdc_equal(a.alpha, b.alpha);
}

HeisenbergElement ps_act_on_heisenberg(const PsElement& p, const HeisenbergElement& h) {
    same_space(p.space, h.space);
    return {h.space, mat_apply(p.g, h.w), h.z + p.alpha.value(h.w)};
}

}  // namespace weillat
