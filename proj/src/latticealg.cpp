#include "weillat/latticealg.hpp"

#include <algorithm>
#include <functional>

#include "weillat/errors.hpp"

namespace weillat {

namespace {

ResidueSpace bare_residue(const FieldConfigPtr& cfg, int dim) {
    ResidueSpace rs;
    rs.p = cfg->p;
    rs.quadratic = cfg->quadratic;
    rs.mb = ((cfg->mb % cfg->p) + cfg->p) % cfg->p;
    rs.mc = ((cfg->mc % cfg->p) + cfg->p) % cfg->p;
    rs.dim = dim;
    return rs;
}

RFq coord_digit(const ResidueSpace& rs, const Fel& c) {
    if (!c.is_integral()) throw precondition_violated("vector not in the lattice");
    auto [ra, rb] = c.frac_pair_below(1);
    return {static_cast<long>(int_mod(numerator(ra), rs.p)),
            static_cast<long>(int_mod(numerator(rb), rs.p))};
}

RVec residue_coords(const ResidueSpace& rs, const Lattice& l, const Vec& v) {
    Vec c = l.coords(v);
    RVec out(l.dim());
    for (int i = 0; i < l.dim(); ++i) out[i] = coord_digit(rs, c[i]);
    return out;
}

bool settled(const Fel& x) { return x.is_exact_zero() || x.is_zero_window(); }

Mat cols_to_mat(const FieldConfigPtr& cfg, const std::vector<Vec>& cols) {
    return Mat::from_cols(cfg, cols);
}

// Shared engine behind gram_lift and witt_extend: the first `frozen` family
// members stay fixed and defects against them are repaired by moving the
// later vectors along the dual basis of the family itself.
std::vector<Vec> gram_lift_core(const Lattice& l, long r, std::vector<Vec> fam,
                                int frozen, const std::vector<long>& targets,
                                const Mat& m, bool symplectic_mode) {
    const FieldConfigPtr& cfg = l.space()->cfg;
    int s = static_cast<int>(fam.size());
    long e = cfg->e;

    ResidueSpace rs = bare_residue(cfg, l.dim());
    {
        std::vector<RVec> red;
        for (const Vec& v : fam) red.push_back(residue_coords(rs, l, v));
        if (!rs.independent(red))
            throw precondition_violated("lift: reductions not independent");
    }
    for (int i = frozen; i < s; ++i) {
        long floor_t = symplectic_mode ? 1 : 1 + e;
        if (targets[i] < floor_t || (i > frozen && targets[i] < targets[i - 1]))
            throw precondition_violated("lift: targets not ascending from the floor");
    }
    // sign symmetry of the target matrix and congruence depths
    Fel eps = Fel::from_int(cfg, l.space()->epsilon);
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) {
            if (!(m.at(k, i) == eps * m.at(i, k).conj()))
                throw precondition_violated("lift: target matrix lacks the sign symmetry");
            Fel defect = m.at(k, i) - l.space()->form(fam[k], fam[i]);
            if (k < frozen && i < frozen) {
                if (!settled(defect))
                    throw precondition_violated("lift: frozen pair with wrong pairing");
            } else if (k == i) {
                if (symplectic_mode) {
                    if (!settled(m.at(i, i)))
                        throw precondition_violated("lift: nonzero diagonal target");
                } else if (!defect.ord_ge(r + targets[i] + e)) {
                    throw precondition_violated("lift: diagonal congruence too shallow");
                }
            } else {
                // the earlier active vector absorbs the defect, so the pair
                // only needs the depth of its smaller target
                int lo = std::min(k, i), hi = std::max(k, i);
                long tm = lo < frozen ? targets[hi] : targets[lo];
                if (!defect.ord_ge(r + tm))
                    throw precondition_violated("lift: congruence too shallow");
            }
        }

    std::vector<Vec> full = extend_to_basis(l, fam);
    Mat bfull = cols_to_mat(cfg, full);
    Mat gfull = bfull.transpose() * l.space()->gram * bfull.conj();
    Mat dual = bfull * mat_inverse(gfull).shifted(r).conj();  // <b_i, dual_j> = pi^r delta

    std::vector<Vec> orig = fam;
    Fel half = Fel::from_rational(cfg, Rat(1, 2));
    int max_sweeps = cfg->K + static_cast<int>(std::abs(r)) + 40;
    for (int sweep = 0;; ++sweep) {
        bool done = true;
        std::vector<Vec> delta(s, vec_zero(cfg, l.dim()));
        for (int i = frozen; i < s; ++i)
            for (int k = i; k < s; ++k) {
                if (k == i && symplectic_mode) continue;
                Fel d = m.at(k, i) - l.space()->form(fam[k], fam[i]);
                if (settled(d)) continue;
                done = false;
                Fel c = d.conj().shifted(-r);
                if (k == i) c = half * c;
                delta[i] = vec_add(delta[i], vec_scale(c, dual.col(k)));
            }
        for (int i = 0; i < frozen; ++i)
            for (int k = frozen; k < s; ++k) {
                Fel d = m.at(k, i) - l.space()->form(fam[k], fam[i]);
                if (settled(d)) continue;
                done = false;
                Fel c = eps * d.shifted(-r);
                delta[k] = vec_add(delta[k], vec_scale(c, dual.col(i)));
            }
        if (done) break;
        if (sweep >= max_sweeps) throw precision_exhausted("lift: defects fail to settle");
        for (int i = frozen; i < s; ++i) fam[i] = vec_add(fam[i], delta[i]);
    }

    for (int i = frozen; i < s; ++i) {
        Vec diff = l.coords(vec_sub(fam[i], orig[i]));
        for (const Fel& c : diff)
            if (!c.ord_ge(targets[i]))
                throw certificate_failure("lift: perturbation left the stated depth");
    }
    return fam;
}

}  // namespace

std::vector<Vec> extend_to_basis(const Lattice& l, const std::vector<Vec>& vs) {
    const FieldConfigPtr& cfg = l.space()->cfg;
    int n = l.dim(), k = static_cast<int>(vs.size());
    ResidueSpace rs = bare_residue(cfg, n);

    std::vector<RVec> cols;
    for (const Vec& v : vs) cols.push_back(residue_coords(rs, l, v));

    // column echelon over the residue field; first nonzero row is the pivot
    std::vector<int> pivot_rows;
    std::vector<RVec> reduced;
    for (int j = 0; j < k; ++j) {
        RVec cur = cols[j];
        for (size_t t = 0; t < reduced.size(); ++t)
            cur = rs.vsub(cur, rs.vscale(cur[pivot_rows[t]], reduced[t]));
        int piv = -1;
        for (int i = 0; i < n; ++i)
            if (!rs.is_zero(cur[i])) { piv = i; break; }
        if (piv < 0) throw dependent_reductions("vectors collapse mod pi");
        cur = rs.vscale(rs.inv(cur[piv]), cur);
        pivot_rows.push_back(piv);
        reduced.push_back(cur);
    }

    std::vector<Vec> out = vs;
    std::vector<bool> used(n, false);
    for (int i : pivot_rows) used[i] = true;
    for (int i = 0; i < n; ++i)
        if (!used[i]) out.push_back(l.basis().col(i));
    return out;
}

AdaptedBasis adapted_basis(const Lattice& l1, const Lattice& l) {
    SmithForm sf = smith_form(l1.basis_inv() * l.basis());
    if (static_cast<int>(sf.d.size()) != l1.dim())
        throw not_sublattice("adapted basis needs full-rank lattices");
    AdaptedBasis ab;
    Mat c = l1.basis() * sf.u;
    for (long d : sf.d) {
        if (d < 0) throw not_sublattice("not contained in the outer lattice");
        ab.exps.push_back(d);
        if (d == 0) ++ab.s;
    }
    for (int j = 0; j < c.cols(); ++j) ab.basis.push_back(c.col(j));
    return ab;
}

namespace {
AdaptedBasis restricted_adapted(const Lattice& l1, const Lattice& l,
                                const std::vector<int>& idx) {
    const FieldConfigPtr& cfg = l1.space()->cfg;
    int m = static_cast<int>(idx.size());
    Mat zero_gram(cfg, m, m);
    SpacePtr bare = HermitianSpace::make(cfg, l1.space()->kind, l1.space()->epsilon, zero_gram);

    auto restrict_rows = [&](const Mat& b) {
        Mat r(cfg, m, b.cols());
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < b.cols(); ++j) r.at(i, j) = b.at(idx[i], j);
        return r;
    };
    Lattice r1 = Lattice::from_generators(bare, restrict_rows(l1.basis()));
    Lattice rl = Lattice::from_generators(bare, restrict_rows(l.basis()));
    AdaptedBasis ab = adapted_basis(r1, rl);

    // re-embed the restricted coordinates
    for (Vec& v : ab.basis) {
        Vec amb = vec_zero(cfg, l1.dim());
        for (int i = 0; i < m; ++i) amb[idx[i]] = v[i];
        v = amb;
    }
    return ab;
}
}  // namespace

AdaptedBasisSplit adapted_basis_admissible(const Lattice& l1, const Lattice& l) {
    if (!is_admissible(l1) || !is_admissible(l))
        throw precondition_violated("adapted split needs admissible lattices");
    const SplitData& sd = *l1.space()->split;
    AdaptedBasisSplit out;
    out.plus = restricted_adapted(l1, l, sd.plus);
    out.minus = restricted_adapted(l1, l, sd.minus);
    return out;
}

std::vector<Vec> gram_lift(const GramLiftProblem& pb) {
    if (pb.vectors.size() != pb.targets.size() ||
        static_cast<int>(pb.vectors.size()) != pb.m.rows() || pb.m.rows() != pb.m.cols())
        throw precondition_violated("lift: shape mismatch");
    if (pb.symplectic_mode && pb.lattice.space()->kind != FormKind::symplectic)
        throw precondition_violated("lift: symplectic mode on a non-symplectic space");
    if (!(dual_lattice(pb.lattice, pb.r) == pb.lattice))
        throw precondition_violated("lift: lattice not self-dual");
    return gram_lift_core(pb.lattice, pb.r, pb.vectors, 0, pb.targets, pb.m,
                          pb.symplectic_mode);
}

Fel conj_solve(const FieldConfigPtr& cfg, const Fel& n, int epsilon) {
    Fel mirror = Fel::from_int(cfg, epsilon) * n.conj();
    if (!(mirror == n))
        throw precondition_violated("conj_solve: wrong conjugation symmetry");
    if (!cfg->quadratic) {
        if (epsilon == 1) return Fel::from_rational(cfg, Rat(1, 2)) * n;
        if (!settled(n)) throw precondition_violated("conj_solve: skew over the base field");
        return Fel::zero(cfg);
    }
    if (epsilon == 1) {
        if (cfg->mb % cfg->p != 0) {
            Fel theta = Fel::omega(cfg) * Fel::from_int(cfg, -cfg->mb).inv();
            return n * theta;
        }
        return Fel::from_rational(cfg, Rat(1, 2)) * n;
    }
    Fel eta = Fel::from_pair(cfg, cfg->mb, 2);  // conj(eta) = -eta, a unit
    return n * eta.inv() * Fel::omega(cfg);
}

IsotropicDecomposition isotropic_decompose(const Lattice& l, long r,
                                           const std::vector<Vec>& vs, long t) {
    const FieldConfigPtr& cfg = l.space()->cfg;
    FormKind kind = l.space()->kind;
    if (cfg->e == 1 && kind != FormKind::symplectic)
        throw precondition_violated(
            "isotropic split at even residue characteristic needs a symplectic space");
    if (t < 1) throw precondition_violated("isotropic split: depth below one");
    int s = static_cast<int>(vs.size());
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            if (!l.space()->form(vs[i], vs[j]).ord_ge(r + t))
                throw precondition_violated("isotropic split: pairings not small enough");

    GramLiftProblem pb;
    pb.lattice = l;
    pb.r = r;
    pb.vectors = vs;
    pb.targets.assign(s, t);
    pb.m = Mat(cfg, s, s);
    pb.symplectic_mode = (kind == FormKind::symplectic);
    std::vector<Vec> vp = gram_lift(pb);

    ResidueModel rm = residue_space(l, r);
    std::vector<RVec> xbar;
    for (const Vec& v : vp) xbar.push_back(rm.reduce(v));
    FiniteIsoComplement fic = finite_isotropic_complement(rm.rs, xbar);

    std::vector<Vec> y0;
    for (const RVec& yb : fic.y) y0.push_back(rm.lift(yb));

    // normalize the cross pairing to exactly delta_ij pi^r
    Mat pmat(cfg, s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            pmat.at(i, j) = l.space()->form(vp[i], y0[j]).shifted(-r);
    Mat cmat = mat_inverse(pmat).conj();
    std::vector<Vec> yt;
    for (int j = 0; j < s; ++j) {
        Vec y = vec_zero(cfg, l.dim());
        for (int k = 0; k < s; ++k) y = vec_add(y, vec_scale(cmat.at(k, j), y0[k]));
        yt.push_back(y);
    }

    // repair isotropy of the y side without touching the cross pairing
    Mat nmat(cfg, s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) nmat.at(i, j) = l.space()->form(yt[i], yt[j]);
    std::vector<Vec> y = yt;
    for (int i = 0; i < s; ++i) {
        for (int k = 0; k < i; ++k)  // kills <y_i, y_k> for k < i
            y[i] = vec_sub(y[i], vec_scale(nmat.at(i, k).shifted(-r), vp[k]));
        Fel nd = l.space()->form(y[i], y[i]);
        if (!settled(nd))
            y[i] = vec_sub(y[i], vec_scale(conj_solve(cfg, nd.shifted(-r), l.space()->epsilon), vp[i]));
    }
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            if (!settled(l.space()->form(y[i], y[j])))
                throw certificate_failure("isotropic split: y side not isotropic");
            Fel want = (i == j) ? Fel::pi_pow(cfg, r) : Fel::zero(cfg);
            if (!(l.space()->form(vp[i], y[j]) == want))
                throw certificate_failure("isotropic split: cross pairing broken");
        }

    // orthogonal core: kernel of pairing against both families, saturated in l
    Mat rows(cfg, 2 * s, l.dim());
    for (int u = 0; u < 2 * s; ++u) {
        const Vec& w = (u < s) ? vp[u] : y[u - s];
        for (int k = 0; k < l.dim(); ++k) {
            Fel acc = Fel::zero(cfg);
            for (int t2 = 0; t2 < l.dim(); ++t2)
                acc = acc + l.space()->gram.at(k, t2) * w[t2].conj();
            rows.at(u, k) = acc;
        }
    }
    std::vector<Vec> ker = field_kernel(rows);
    IsotropicDecomposition out;
    out.x = vp;
    out.y = y;
    if (!ker.empty()) {
        Mat kb = cols_to_mat(cfg, ker);
        SmithForm sf = smith_form(l.basis_inv() * kb);
        if (sf.d.size() != ker.size()) throw rank_deficient("core kernel degenerate");
        Mat cb = kb * sf.vinv;
        for (size_t i = 0; i < sf.d.size(); ++i)
            cb.set_col(static_cast<int>(i), vec_shift(cb.col(static_cast<int>(i)), -sf.d[i]));
        Mat canon = hnf_canonical(cb);
        for (int j = 0; j < canon.cols(); ++j) out.core.push_back(canon.col(j));
    }
    return out;
}

std::vector<RVec> finite_witt(const ResidueSpace& rs, const std::vector<RVec>& from,
                              const std::vector<RVec>& to) {
    if (rs.kind == FormKind::symmetric && rs.p == 2)
        throw not_implemented_for_kind("symmetric residue extension in characteristic two");
    int s = static_cast<int>(from.size());
    if (static_cast<int>(to.size()) != s) throw precondition_violated("family size mismatch");
    if (!rs.independent(from) || !rs.independent(to))
        throw precondition_violated("residue families not independent");
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            if (!(rs.form(from[i], from[j]) == rs.form(to[i], to[j])))
                throw precondition_violated("residue families not isometric");

    if (rs.vector_count(rs.dim) > 3'000'000)
        throw group_too_large("residue space too large to search");
    long total = static_cast<long>(rs.vector_count(rs.dim));

    std::vector<RVec> family = from;
    for (int k = 0; k < rs.dim && static_cast<int>(family.size()) < rs.dim; ++k) {
        RVec ek(rs.dim);
        ek[k] = rs.one();
        family.push_back(ek);
        if (!rs.independent(family)) family.pop_back();
    }

    std::vector<RVec> imgs = to;
    std::function<bool(int)> dfs = [&](int k) -> bool {
        if (k == rs.dim) return true;
        for (long idx = 0; idx < total; ++idx) {
            RVec z = rs.vector_at(idx, rs.dim);
            bool ok = rs.form(z, z) == rs.form(family[k], family[k]);
            for (int j = 0; ok && j < k; ++j)
                ok = rs.form(z, imgs[j]) == rs.form(family[k], family[j]);
            if (!ok) continue;
            imgs.push_back(z);
            if (!rs.independent(imgs)) {
                imgs.pop_back();
                continue;
            }
            if (dfs(k + 1)) return true;
            imgs.pop_back();
        }
        return false;
    };
    if (!dfs(s)) throw no_extension("residue isometry refuses to extend");

    // express as images of the standard basis: solve family * x = e_c
    std::vector<RVec> rows(rs.dim, RVec(rs.dim));
    for (int j = 0; j < rs.dim; ++j)
        for (int i = 0; i < rs.dim; ++i) rows[i][j] = family[j][i];
    std::vector<RVec> out;
    for (int c = 0; c < rs.dim; ++c) {
        RVec e(rs.dim);
        e[c] = rs.one();
        RVec x;
        if (!rs.solve_linear(rows, e, &x)) throw no_extension("family failed to span");
        RVec img = rs.vzero();
        for (int j = 0; j < rs.dim; ++j) img = rs.vadd(img, rs.vscale(x[j], imgs[j]));
        out.push_back(img);
    }
    return out;
}

FiniteIsoComplement finite_isotropic_complement(const ResidueSpace& rs,
                                                const std::vector<RVec>& xbar) {
    if (rs.kind == FormKind::symmetric && rs.p == 2)
        throw not_implemented_for_kind("symmetric residue split in characteristic two");
    int s = static_cast<int>(xbar.size());
    if (!rs.independent(xbar)) throw precondition_violated("x side not independent");
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            if (!rs.is_zero(rs.form(xbar[i], xbar[j])))
                throw precondition_violated("x side not totally isotropic");

    // dual vectors: <x_j, y_i> = delta_ij, solved on z = conj(y)
    std::vector<RVec> rows(s, RVec(rs.dim));
    for (int j = 0; j < s; ++j)
        for (int L = 0; L < rs.dim; ++L) {
            RFq acc = rs.zero();
            for (int k = 0; k < rs.dim; ++k)
                acc = rs.add(acc, rs.mul(xbar[j][k], rs.gram[k][L]));
            rows[j][L] = acc;
        }
    std::vector<RVec> y;
    for (int i = 0; i < s; ++i) {
        RVec rhs(s);
        rhs[i] = rs.one();
        RVec z;
        if (!rs.solve_linear(rows, rhs, &z)) throw no_extension("pairing system unsolvable");
        for (auto& c : z) c = rs.conj(c);
        y.push_back(z);
    }

    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < i; ++j)
            y[i] = rs.vsub(y[i], rs.vscale(rs.form(y[i], y[j]), xbar[j]));
        RFq nd = rs.form(y[i], y[i]);
        if (!rs.is_zero(nd)) {
            RFq a;
            if (rs.kind == FormKind::symplectic)
                throw certificate_failure("alternating form with nonzero diagonal");
            else if (rs.kind == FormKind::symmetric || rs.epsilon == 1)
                a = rs.trace_solve(nd);
            else
                a = rs.skew_solve(nd);
            y[i] = rs.vsub(y[i], rs.vscale(a, xbar[i]));
        }
    }
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            if (!rs.is_zero(rs.form(y[i], y[j])))
                throw certificate_failure("y side not isotropic");
            RFq want = (i == j) ? rs.one() : rs.zero();
            if (!(rs.form(xbar[i], y[j]) == want))
                throw certificate_failure("cross pairing not normalized");
        }

    // orthogonal core
    std::vector<RVec> prows;
    for (int u = 0; u < 2 * s; ++u) {
        const RVec& w = (u < s) ? xbar[u] : y[u - s];
        RVec row(rs.dim);
        for (int k = 0; k < rs.dim; ++k) {
            RFq acc = rs.zero();
            for (int L = 0; L < rs.dim; ++L)
                acc = rs.add(acc, rs.mul(rs.gram[k][L], rs.conj(w[L])));
            row[k] = acc;
        }
        prows.push_back(row);
    }
    FiniteIsoComplement out;
    out.y = y;
    out.core = rs.kernel_basis(prows, rs.dim);
    return out;
}

IsometryElement witt_extend(const Lattice& l, long r, const std::vector<Vec>& from,
                            const std::vector<Vec>& to) {
    const FieldConfigPtr& cfg = l.space()->cfg;
    FormKind kind = l.space()->kind;
    int s = static_cast<int>(from.size());
    if (static_cast<int>(to.size()) != s) throw precondition_violated("family size mismatch");
    bool even_symmetric = (cfg->e == 1 && kind == FormKind::symmetric);
    if (cfg->e == 1 && kind == FormKind::hermitian)
        throw not_implemented_for_kind("hermitian lattice extension in residue characteristic two");
    if (even_symmetric) {
        if (!l.space()->split || !l.space()->split->aniso.empty())
            throw not_implemented_for_kind(
                "even symmetric extension needs a split space without anisotropic part");
    }
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            if (!(l.space()->form(from[i], from[j]) == l.space()->form(to[i], to[j])))
                throw precondition_violated("families not isometric");

    ResidueModel rm = residue_space(l, r);
    std::vector<RVec> fbar, tbar;
    for (const Vec& v : from) fbar.push_back(rm.reduce(v));
    for (const Vec& v : to) tbar.push_back(rm.reduce(v));
    if (!rm.rs.independent(fbar) || !rm.rs.independent(tbar))
        throw precondition_violated("reductions not independent");

    int n = l.dim();
    std::vector<Vec> full = extend_to_basis(l, from);
    Mat mtargets(cfg, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mtargets.at(i, j) = l.space()->form(full[i], full[j]);

    std::vector<Vec> newfam = to;
    long tmove = 1 + (even_symmetric ? cfg->e : 0);

    if (!even_symmetric) {
        std::vector<RVec> ubar = finite_witt(rm.rs, fbar, tbar);
        for (int j = s; j < n; ++j) {
            RVec bj = rm.reduce(full[j]);
            RVec img = rm.rs.vzero();
            for (int k = 0; k < n; ++k) img = rm.rs.vadd(img, rm.rs.vscale(bj[k], ubar[k]));
            newfam.push_back(rm.lift(img));
        }
    } else {
        // Backtracking over residues mod pi^2: place images of the completed
        // basis one at a time, subject to the depth-two Gram congruences that
        // the lifting engine needs, and to independence mod pi.
        std::vector<Vec> reps = quotient_reps(l, l.scaled(2));
        std::vector<RVec> placed_red = tbar;
        std::function<bool(int)> dfs = [&](int j) -> bool {
            if (j == n) return true;
            for (const Vec& cand : reps) {
                bool ok = (mtargets.at(j, j) - l.space()->form(cand, cand)).ord_ge(r + 3);
                for (int i = 0; ok && i < s; ++i)
                    ok = (mtargets.at(j, i) - l.space()->form(cand, newfam[i])).ord_ge(r + 2);
                for (int k2 = s; ok && k2 < j; ++k2)
                    ok = (mtargets.at(j, k2) - l.space()->form(cand, newfam[k2])).ord_ge(r + 2);
                if (!ok) continue;
                placed_red.push_back(rm.reduce(cand));
                if (!rm.rs.independent(placed_red)) {
                    placed_red.pop_back();
                    continue;
                }
                newfam.push_back(cand);
                if (dfs(j + 1)) return true;
                newfam.pop_back();
                placed_red.pop_back();
            }
            return false;
        };
        if (!dfs(s)) throw certificate_failure("no depth-two completion found");
    }

    std::vector<long> targets(n, tmove);
    std::vector<Vec> bprime = gram_lift_core(l, r, newfam, s, targets, mtargets,
                                             kind == FormKind::symplectic);

    Mat u = cols_to_mat(cfg, bprime) * mat_inverse(cols_to_mat(cfg, full));
    IsometryElement iso = IsometryElement::make(l.space(), u);
    if (!(iso.map_lattice(l) == l)) throw certificate_failure("extension moved the lattice");
    return iso;
}

}  // namespace weillat
