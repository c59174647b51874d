#include "weillat/weilrep.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "weillat/errors.hpp"

namespace weillat {

namespace {

void check_space(const LatticeModel& lm, const SymplPtr& other) {
    if (lm.space != other)
        throw precondition_violated("operands live on different polarized spaces");
}

void add_term(ModelVector& v, const Vec& rep, const Cyc& c) {
    if (c.is_zero()) return;
    for (size_t i = 0; i < v.terms.size(); ++i) {
        if (!vec_eq(v.terms[i].rep, rep)) continue;
        Cyc s = v.terms[i].coeff + c;
        if (s.is_zero())
            v.terms.erase(v.terms.begin() + static_cast<long>(i));
        else
            v.terms[i].coeff = s;
        return;
    }
    v.terms.push_back({rep, c});
}

}  // namespace

LatticeModel LatticeModel::make(SymplPtr s, Lattice a) {
    if (!s) throw precondition_violated("lattice model needs a polarized space");
    if (a.space() != s->sp)
        throw precondition_violated("lattice is attached to a different space");
    if (!is_admissible(a))
        throw precondition_violated("lattice does not split along the polarization");
    long r = s->cfg()->r;
    if (!(dual_lattice(a, r) == a))
        throw not_self_dual("lattice model needs a self-dual lattice");
    return LatticeModel{std::move(s), std::move(a), r};
}

Vec coset_rep(const LatticeModel& lm, const Vec& w) {
    const FieldConfigPtr& cfg = lm.space->cfg();
    Vec c = lm.A.coords(w);
    Vec fr(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        std::pair<Rat, Rat> pr = c[i].frac_pair_below(0);
        fr[i] = Fel::from_pair(cfg, pr.first, pr.second);
    }
    return lm.A.from_coords(fr);
}

ModelVector model_zero() { return {}; }

ModelVector make_s(const LatticeModel& lm, const Vec& w) {
    Vec x = coset_rep(lm, w);
    Vec a = vec_sub(w, x);
    Cyc c = Cyc::from_unity(psi_eval(lm.space->beta(a, w)));
    ModelVector out;
    out.terms.push_back({std::move(x), std::move(c)});
    return out;
}

Cyc evaluate(const LatticeModel& lm, const ModelVector& f, const Vec& w,
             const Fel& z) {
    Vec x = coset_rep(lm, w);
    for (const ModelTerm& t : f.terms) {
        if (!vec_eq(t.rep, x)) continue;
        Vec a = vec_sub(w, x);
        return Cyc::from_unity(psi_eval(z - lm.space->beta(a, x))) * t.coeff;
    }
    return Cyc::zero(lm.space->cfg()->p);
}

ModelVector mv_add(const ModelVector& a, const ModelVector& b) {
    ModelVector out = a;
    for (const ModelTerm& t : b.terms) add_term(out, t.rep, t.coeff);
    return out;
}

ModelVector mv_scale(const Cyc& c, const ModelVector& f) {
    ModelVector out;
    if (c.is_zero()) return out;
    for (const ModelTerm& t : f.terms) out.terms.push_back({t.rep, c * t.coeff});
    return out;
}

bool mv_eq(const ModelVector& a, const ModelVector& b) {
    if (a.terms.size() != b.terms.size()) return false;
    for (const ModelTerm& t : a.terms) {
        bool found = false;
        for (const ModelTerm& u : b.terms) {
            if (!vec_eq(t.rep, u.rep)) continue;
            if (t.coeff != u.coeff) return false;
            found = true;
            break;
        }
        if (!found) return false;
    }
    return true;
}

bool mv_is_zero(const ModelVector& f) { return f.terms.empty(); }

ModelVector rho_apply(const LatticeModel& lm, const HeisenbergElement& h,
                      const ModelVector& f) {
    check_space(lm, h.space);
    Fel z0 = Fel::zero(lm.space->cfg());
    ModelVector out;
    for (const ModelTerm& t : f.terms) {
        Vec xp = coset_rep(lm, vec_sub(t.rep, h.w));
        Cyc inner = evaluate(lm, f, vec_add(xp, h.w), z0);
        Cyc c = Cyc::from_unity(psi_eval(h.z + lm.space->beta(xp, h.w))) * inner;
        add_term(out, xp, c);
    }
    return out;
}

StabilizerData compute_A_g(const LatticeModel& lm, const PsElement& q) {
    check_space(lm, q.space);
    const SpacePtr& sp = lm.space->sp;
    Lattice pre = Lattice::from_basis(sp, mat_inverse(q.g) * lm.A.basis());
    Lattice s = lm.A.intersect(pre);

    // Worst valuation of the quadratic map on s; its defect is
    // beta(q.g ., q.g .) - beta on s x s, which pairs lattice vectors with
    // lattice vectors and so never drops below r.
    int n = s.dim();
    std::vector<Vec> b;
    b.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) b.push_back(s.basis().col(i));
    Mat d = q.alpha.defect();
    long m = lm.r;
    for (int i = 0; i < n; ++i) {
        Fel qi = q.alpha.value(b[i]);
        if (!qi.ord_ge(lm.r)) m = std::min(m, qi.val());
        for (int j = i + 1; j < n; ++j) {
            Fel dij = pairing(d, b[i], b[j]);
            if (!dij.ord_ge(lm.r)) m = std::min(m, dij.val());
        }
    }
    long k = m < lm.r ? (lm.r - m + 1) / 2 : 0;

    Lattice sub = s;
    if (k > 0) {
        Lattice deep = s.scaled(k);
        std::vector<std::vector<Fel>> cols;
        for (const Vec& a : quotient_reps(s, deep))
            if (q.alpha.value(a).ord_ge(lm.r)) cols.push_back(a);
        for (int i = 0; i < n; ++i) cols.push_back(deep.basis().col(i));
        sub = Lattice::from_generators(sp, Mat::from_cols(sp->cfg, cols));
    }
    return {sub, quotient_reps(lm.A, sub)};
}

namespace {

Cyc m_value_with(const LatticeModel& lm, const PsElement& q,
                 const StabilizerData& stab, const ModelVector& f,
                 const Vec& y, const Fel& z) {
    Cyc acc = Cyc::zero(lm.space->cfg()->p);
    for (const Vec& a : stab.transversal) {
        Vec x = vec_add(a, y);
        Cyc inner = evaluate(lm, f, mat_apply(q.g, x), z + q.alpha.value(x));
        if (inner.is_zero()) continue;
        acc = acc + Cyc::from_unity(psi_eval(lm.space->beta(a, y))) * inner;
    }
    return acc;
}

}  // namespace

ModelVector apply_M(const LatticeModel& lm, const PsElement& p,
                    const ModelVector& f) {
    check_space(lm, p.space);
    PsElement q = ps_inv(p);
    StabilizerData stab = compute_A_g(lm, q);
    const SpacePtr& sp = lm.space->sp;
    Lattice ga = Lattice::from_basis(sp, p.g * lm.A.basis());
    std::vector<Vec> shifts = quotient_reps(lm.A.sum(ga), lm.A);

    std::vector<Vec> cands;
    for (const ModelTerm& t : f.terms) {
        Vec gx = mat_apply(p.g, t.rep);
        for (const Vec& s : shifts) {
            Vec y = coset_rep(lm, vec_add(gx, s));
            bool dup = false;
            for (const Vec& c : cands)
                if (vec_eq(c, y)) {
                    dup = true;
                    break;
                }
            if (!dup) cands.push_back(std::move(y));
        }
    }

    Fel z0 = Fel::zero(sp->cfg);
    ModelVector out;
    for (const Vec& y : cands) {
        Cyc v = m_value_with(lm, q, stab, f, y, z0);
        if (!v.is_zero()) out.terms.push_back({y, std::move(v)});
    }
    return out;
}

Cyc apply_M_value(const LatticeModel& lm, const PsElement& p,
                  const ModelVector& f, const Vec& y, const Fel& z) {
    check_space(lm, p.space);
    PsElement q = ps_inv(p);
    StabilizerData stab = compute_A_g(lm, q);
    return m_value_with(lm, q, stab, f, y, z);
}

Int gauss_group_order(const LatticeModel& lm, const PsElement& p) {
    check_space(lm, p.space);
    StabilizerData stab = compute_A_g(lm, ps_inv(p));
    Lattice ga = Lattice::from_basis(lm.space->sp, p.g * lm.A.basis());
    long e = lm.A.intersect(ga).index_pow(stab.sub);
    Int n = 1;
    for (long i = 0; i < e; ++i) n *= lm.space->cfg()->p;
    return n;
}

bool gamma_A_member(const LatticeModel& lm, const Mat& g) {
    Lattice img = Lattice::from_basis(lm.space->sp, g * lm.A.basis());
    return lm.A.contains_lattice(img);
}

bool gamma_A_circ_member(const LatticeModel& lm, const Mat& g) {
    if (!gamma_A_member(lm, g)) return false;
    PsElement p = splitting(lm.space, g);
    int n = lm.A.dim();
    for (int i = 0; i < n; ++i) {
        Vec bi = lm.A.basis().col(i);
        if (!p.alpha.value(bi).ord_ge(lm.r)) return false;
        for (int j = i + 1; j < n; ++j) {
            Vec bij = vec_add(bi, lm.A.basis().col(j));
            if (!p.alpha.value(bij).ord_ge(lm.r)) return false;
        }
    }
    return true;
}

namespace {

std::string residue_key(const Mat& m, long level) {
    std::string key;
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::pair<Rat, Rat> pr = m.at(i, j).frac_pair_below(level);
            key += pr.first.str();
            key += ',';
            key += pr.second.str();
            key += ';';
        }
    }
    return key;
}

FiniteLevelGroup walk_group(const std::vector<Mat>& gens, long level,
                            std::string tag, long cap, bool truncate) {
    if (gens.empty())
        throw precondition_violated("group enumeration needs generators");
    FieldConfigPtr cfg = gens[0].config();
    int n = gens[0].rows();
    if (level < 1 || level > cfg->K)
        throw precondition_violated("enumeration level outside the digit window");
    if (cap < 1) throw precondition_violated("enumeration cap must be positive");

    std::vector<Mat> seed;
    for (const Mat& g : gens) {
        if (g.rows() != n || g.cols() != n)
            throw precondition_violated("generators of mixed size");
        Mat gi = mat_inverse(g);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!g.at(i, j).ord_ge(0) || !gi.at(i, j).ord_ge(0))
                    throw precondition_violated("generators must be integral with integral inverse");
        seed.push_back(g);
        seed.push_back(std::move(gi));
    }

    FiniteLevelGroup grp{cfg, level, std::move(tag), {}};
    grp.elements.push_back(Mat::identity(cfg, n));
    std::map<std::string, size_t> seen;
    seen.emplace(residue_key(grp.elements[0], level), 0);
    if (truncate && static_cast<long>(grp.elements.size()) >= cap) return grp;

    for (size_t head = 0; head < grp.elements.size(); ++head) {
        for (const Mat& s : seed) {
            Mat y = s * grp.elements[head];
            std::string key = residue_key(y, level);
            if (seen.count(key)) continue;
            if (static_cast<long>(grp.elements.size()) >= cap) {
                if (truncate) return grp;
                throw group_too_large("group closure exceeds the element cap");
            }
            seen.emplace(std::move(key), grp.elements.size());
            grp.elements.push_back(std::move(y));
            if (truncate && static_cast<long>(grp.elements.size()) >= cap)
                return grp;
        }
    }
    return grp;
}

}  // namespace

FiniteLevelGroup enumerate_group(const std::vector<Mat>& gens, long level,
                                 std::string tag, long cap) {
    return walk_group(gens, level, std::move(tag), cap, false);
}

FiniteLevelGroup sample_group(const std::vector<Mat>& gens, long level,
                              std::string tag, long count) {
    return walk_group(gens, level, std::move(tag), count, true);
}

ModelVector average_s(const LatticeModel& lm, const Vec& w,
                      const FiniteLevelGroup& grp) {
    ModelVector base = make_s(lm, w);
    ModelVector acc = model_zero();
    for (const Mat& u : grp.elements)
        acc = mv_add(acc, apply_M(lm, splitting(lm.space, u), base));
    Rat inv_n(1, static_cast<long>(grp.elements.size()));
    return mv_scale(Cyc::from_rat(lm.space->cfg()->p, inv_n), acc);
}

long sufficient_level(const LatticeModel& lm, const Vec& w) {
    // a pi^l change of u moves beta(u^{-1}w - w, w) and alpha^u(w) by about
    // pi^{l - 2 depth(w)}, with one more lost digit from the halves in alpha
    // at the even prime
    long depth = 0;
    for (const Fel& c : lm.A.coords(w)) {
        if (c.is_exact_zero() || c.is_zero_window()) continue;
        if (c.val() < 0) depth = std::max(depth, -c.val());
    }
    return std::max(1L, lm.r + 2 * depth + lm.space->cfg()->e);
}

bool nonvanishing_test(const LatticeModel& lm, const Vec& w,
                       const FiniteLevelGroup& grp) {
    Vec wc = coset_rep(lm, w);
    for (const Mat& u : grp.elements) {
        Lattice img = Lattice::from_basis(lm.space->sp, u * lm.A.basis());
        if (!(img == lm.A)) continue;
        PsElement q = ps_inv(splitting(lm.space, u));
        Vec uiw = mat_apply(q.g, w);
        if (!vec_eq(coset_rep(lm, uiw), wc)) continue;
        Fel expo = q.alpha.value(w) - lm.space->beta(vec_sub(uiw, w), w);
        if (!psi_eval(expo).is_trivial()) return false;
    }
    return true;
}

}  // namespace weillat
