#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "weillat/errors.hpp"
#include "weillat/weilrep.hpp"

using namespace weillat;

namespace {

struct Model {
    FieldConfigPtr cfg;
    SymplPtr ss;
    LatticeModel lm;
};

Model model_of(long p, int dim = 2, long K = 30) {
    auto cfg = FieldConfig::make(p, K, 0);
    auto [sp, l] = standard_space(cfg, FormKind::symplectic, dim, 0);
    SymplPtr ss = SymplecticSpace::make(sp);
    return Model{cfg, ss, LatticeModel::make(ss, l)};
}

Fel rnd_fel(const FieldConfigPtr& cfg, std::mt19937& rng, int bound, int lo = 0) {
    std::uniform_int_distribution<int> d(-bound, bound), s(lo, 1);
    return Fel::from_int(cfg, d(rng)).shifted(s(rng));
}

Vec rnd_vec(const FieldConfigPtr& cfg, std::mt19937& rng, int n, int bound = 9,
            int lo = 0) {
    Vec v;
    for (int i = 0; i < n; ++i) v.push_back(rnd_fel(cfg, rng, bound, lo));
    return v;
}

Vec rnd_lattice_vec(const LatticeModel& lm, std::mt19937& rng, int bound = 9) {
    return lm.A.from_coords(rnd_vec(lm.space->cfg(), rng, lm.space->dim(), bound));
}

// 2x2 matrix [[a,b],[c,d]] from rationals
Mat mat2(const FieldConfigPtr& cfg, const Rat& a, const Rat& b, const Rat& c,
         const Rat& d) {
    Mat m = Mat::identity(cfg, 2);
    m.at(0, 0) = Fel::from_rational(cfg, a);
    m.at(0, 1) = Fel::from_rational(cfg, b);
    m.at(1, 0) = Fel::from_rational(cfg, c);
    m.at(1, 1) = Fel::from_rational(cfg, d);
    return m;
}

// random product of Levi and symmetric-block unipotent generators; integral,
// and the diagonal of each unipotent block is even, so every factor fixes the
// lattice and has integral alpha values on it
Mat rnd_gamma_circ(const SymplPtr& s, std::mt19937& rng, int steps = 5) {
    const FieldConfigPtr& cfg = s->cfg();
    const SplitData& sd = *s->sp->split;
    int n = static_cast<int>(sd.plus.size());
    std::uniform_int_distribution<int> typ(0, 2), idx(0, n - 1), coef(-4, 4);
    Mat g = Mat::identity(cfg, s->dim());
    for (int step = 0; step < steps; ++step) {
        Mat h = Mat::identity(cfg, s->dim());
        int i = idx(rng), j = idx(rng);
        Fel x = Fel::from_int(cfg, coef(rng));
        switch (typ(rng)) {
            case 0:
                if (i == j) break;
                h.at(sd.plus[i], sd.plus[j]) = x;
                h.at(sd.minus[j], sd.minus[i]) = -x;
                break;
            case 1:
                h.at(sd.plus[i], sd.minus[j]) = h.at(sd.plus[i], sd.minus[j]) + x;
                h.at(sd.plus[j], sd.minus[i]) = h.at(sd.plus[j], sd.minus[i]) + x;
                break;
            default:
                h.at(sd.minus[i], sd.plus[j]) = h.at(sd.minus[i], sd.plus[j]) + x;
                h.at(sd.minus[j], sd.plus[i]) = h.at(sd.minus[j], sd.plus[i]) + x;
                break;
        }
        g = g * h;
    }
    return g;
}

// random element of Sp_2 with entries of bounded negative valuation: a short
// product of unipotents with parameters down to valuation -1 and diagonal
// torus elements diag(pi^v, pi^-v)
Mat rnd_general(const FieldConfigPtr& cfg, std::mt19937& rng, int steps = 3) {
    std::uniform_int_distribution<int> typ(0, 2), coef(-5, 5), sh(-1, 1);
    Mat g = Mat::identity(cfg, 2);
    for (int step = 0; step < steps; ++step) {
        Mat h = Mat::identity(cfg, 2);
        switch (typ(rng)) {
            case 0:
                h.at(0, 1) = Fel::from_int(cfg, coef(rng)).shifted(sh(rng));
                break;
            case 1:
                h.at(1, 0) = Fel::from_int(cfg, coef(rng)).shifted(sh(rng));
                break;
            default: {
                int v = sh(rng);
                h.at(0, 0) = Fel::pi_pow(cfg, v);
                h.at(1, 1) = Fel::pi_pow(cfg, -v);
                break;
            }
        }
        g = g * h;
    }
    return g;
}

ModelVector rnd_mv(const LatticeModel& lm, std::mt19937& rng, int terms = 2) {
    const FieldConfigPtr& cfg = lm.space->cfg();
    ModelVector f = model_zero();
    for (int t = 0; t < terms; ++t) {
        Vec w = rnd_vec(cfg, rng, lm.space->dim(), 9, -2);
        std::uniform_int_distribution<int> num(-5, 5);
        Cyc c = Cyc::from_rat(cfg->p, Rat(num(rng), 1)) +
                Cyc::root_of_unity(cfg->p, 1, num(rng));
        f = mv_add(f, mv_scale(c, make_s(lm, w)));
    }
    return f;
}

Cyc psi_c(const FieldConfigPtr& cfg, const Fel& x) {
    return Cyc::from_unity(psi_eval(x));
}

// coefficient of the column at a given coset, zero if absent
Cyc term_coeff(const LatticeModel& lm, const ModelVector& f, const Vec& w) {
    Vec x = coset_rep(lm, w);
    for (const ModelTerm& t : f.terms)
        if (vec_eq(t.rep, x)) return t.coeff;
    return Cyc::zero(lm.space->cfg()->p);
}

}  // namespace

TEST_CASE("canonical coset representatives") {
    std::mt19937 rng(401);
    for (long p : {2L, 3L}) {
        Model m = model_of(p);
        const FieldConfigPtr& cfg = m.cfg;
        for (int trial = 0; trial < 25; ++trial) {
            Vec w = rnd_vec(cfg, rng, 2, 9, -3);
            Vec x = coset_rep(m.lm, w);
            CHECK(m.lm.A.contains(vec_sub(w, x)));
            CHECK(vec_eq(coset_rep(m.lm, x), x));
            Vec a = rnd_lattice_vec(m.lm, rng);
            CHECK(vec_eq(coset_rep(m.lm, vec_add(w, a)), x));
            CHECK(vec_is_zero_window(coset_rep(m.lm, a)));
        }
    }
    // digits below the lattice survive verbatim in the representative
    Model m2 = model_of(2);
    Vec w{Fel::from_rational(m2.cfg, Rat(1, 2)),
          Fel::from_rational(m2.cfg, Rat(3, 4))};
    CHECK(vec_eq(coset_rep(m2.lm, w), w));
    Vec w2{Fel::from_rational(m2.cfg, Rat(5, 2)),
           Fel::from_rational(m2.cfg, Rat(-1, 4))};
    CHECK(vec_eq(coset_rep(m2.lm, w2), w));
}

TEST_CASE("columns and the coset transformation rule") {
    std::mt19937 rng(402);
    for (long p : {2L, 3L}) {
        Model m = model_of(p);
        const FieldConfigPtr& cfg = m.cfg;
        for (int trial = 0; trial < 15; ++trial) {
            Vec w = rnd_vec(cfg, rng, 2, 9, -2);
            ModelVector s = make_s(m.lm, w);
            CHECK(evaluate(m.lm, s, w, Fel::zero(cfg)) == Cyc::one(p));

            // value on the support coset straight from the defining rule
            Vec a = rnd_lattice_vec(m.lm, rng);
            Fel z = rnd_fel(cfg, rng, 9, -2);
            Cyc want = psi_c(cfg, z - m.ss->beta(a, w));
            CHECK(evaluate(m.lm, s, vec_add(w, a), z) == want);

            // translating the defining point rescales the column by a root
            // of unity
            ModelVector s2 = make_s(m.lm, vec_add(w, a));
            CHECK(mv_eq(s2, mv_scale(psi_c(cfg, m.ss->beta(a, w)), s)));

            // off the support coset the value vanishes
            Vec off = vec_add(w, Vec{Fel::from_rational(cfg, Rat(1, p)),
                                     Fel::zero(cfg)});
            CHECK(evaluate(m.lm, s, off, z).is_zero());

            CHECK(mv_is_zero(mv_add(s, mv_scale(-Cyc::one(p), s))));
            CHECK(!mv_is_zero(s));
        }
        ModelVector s0 = make_s(m.lm, vec_zero(cfg, 2));
        Vec a = rnd_lattice_vec(m.lm, rng);
        CHECK(evaluate(m.lm, s0, a, Fel::zero(cfg)) == Cyc::one(p));
    }
}

TEST_CASE("right translation acts through the group law") {
    std::mt19937 rng(403);
    for (long p : {2L, 3L}) {
        Model m = model_of(p);
        const FieldConfigPtr& cfg = m.cfg;
        for (int trial = 0; trial < 10; ++trial) {
            ModelVector f = rnd_mv(m.lm, rng);
            HeisenbergElement h{m.ss, rnd_vec(cfg, rng, 2, 9, -1),
                                rnd_fel(cfg, rng, 9, -2)};

            // defining rule at sample points, on and off the support
            ModelVector g = rho_apply(m.lm, h, f);
            for (int probe = 0; probe < 6; ++probe) {
                Vec x = rnd_vec(cfg, rng, 2, 9, -2);
                Fel z = rnd_fel(cfg, rng, 9, -1);
                Cyc want = evaluate(m.lm, f, vec_add(x, h.w),
                                    z + h.z + m.ss->beta(x, h.w));
                CHECK(evaluate(m.lm, g, x, z) == want);
            }

            // central elements scale by a root of unity
            Fel z = rnd_fel(cfg, rng, 9, -2);
            HeisenbergElement zc{m.ss, vec_zero(cfg, 2), z};
            CHECK(mv_eq(rho_apply(m.lm, zc, f), mv_scale(psi_c(cfg, z), f)));

            // lattice translations fix the basis column through 0
            HeisenbergElement at{m.ss, rnd_lattice_vec(m.lm, rng),
                                 Fel::zero(cfg)};
            ModelVector s0 = make_s(m.lm, vec_zero(cfg, 2));
            CHECK(mv_eq(rho_apply(m.lm, at, s0), s0));

            // composition matches the group product
            HeisenbergElement h2{m.ss, rnd_vec(cfg, rng, 2, 9, -1),
                                 rnd_fel(cfg, rng, 9, -1)};
            CHECK(mv_eq(rho_apply(m.lm, h, rho_apply(m.lm, h2, f)),
                        rho_apply(m.lm, hb_mul(h, h2), f)));
        }
    }
}

TEST_CASE("stabilizer sublattice of the operator sum") {
    std::mt19937 rng(404);
    for (long p : {2L, 3L}) {
        Model m = model_of(p);
        const FieldConfigPtr& cfg = m.cfg;

        StabilizerData id = compute_A_g(m.lm, ps_identity(m.ss));
        CHECK(id.sub == m.lm.A);
        REQUIRE(id.transversal.size() == 1);
        CHECK(vec_is_zero_window(id.transversal[0]));

        // diagonal torus element: the condition is divisibility in the
        // second coordinate and the quadratic term vanishes
        Mat d = mat2(cfg, Rat(cfg->p), 0, 0, Rat(1, cfg->p));
        StabilizerData sd = compute_A_g(m.lm, splitting(m.ss, d));
        Mat cols = Mat::identity(cfg, 2);
        cols.at(1, 1) = Fel::pi_pow(cfg, 1);
        CHECK(sd.sub == Lattice::from_generators(m.ss->sp, cols));
        CHECK(sd.transversal.size() == static_cast<size_t>(cfg->p));

        // exhaustive cross-check on the residue cube: membership in the
        // computed sublattice agrees pointwise with the two defining
        // conditions, and the index matches the survivor count
        long m_depth = 4;
        for (int trial = 0; trial < 4; ++trial) {
            Mat g = rnd_general(cfg, rng, 2);
            PsElement q = (trial % 2 == 0) ? splitting(m.ss, g)
                                           : ps_inv(splitting(m.ss, g));
            StabilizerData st = compute_A_g(m.lm, q);
            REQUIRE(st.sub.contains_lattice(m.lm.A.scaled(m_depth)));
            long idx = m.lm.A.index_pow(st.sub);
            long survivors = 0;
            for (const Vec& a : quotient_reps(m.lm.A, m.lm.A.scaled(m_depth))) {
                bool direct = m.lm.A.contains(mat_apply(q.g, a)) &&
                              q.alpha.value(a).ord_ge(m.lm.r);
                CHECK(st.sub.contains(a) == direct);
                if (direct) ++survivors;
            }
            long expect = 1;
            for (long i = 0; i < 2 * m_depth - idx; ++i) expect *= cfg->p;
            CHECK(survivors == expect);
            size_t tsize = 1;
            for (long i = 0; i < idx; ++i) tsize *= cfg->p;
            CHECK(st.transversal.size() == tsize);
        }
    }
}

TEST_CASE("identity and lattice-preserving translations of the operator") {
    std::mt19937 rng(405);
    for (long p : {2L, 3L}) {
        for (int dim : {2, 4}) {
            Model m = model_of(p, dim);
            const FieldConfigPtr& cfg = m.cfg;
            ModelVector f = rnd_mv(m.lm, rng);
            CHECK(mv_eq(apply_M(m.lm, ps_identity(m.ss), f), f));

            for (int trial = 0; trial < (dim == 2 ? 6 : 2); ++trial) {
                Mat g = rnd_gamma_circ(m.ss, rng);
                REQUIRE(gamma_A_member(m.lm, g));
                REQUIRE(gamma_A_circ_member(m.lm, g));
                PsElement q = ps_inv(splitting(m.ss, g));
                ModelVector Mf = apply_M(m.lm, splitting(m.ss, g), f);
                CHECK(Mf.terms.size() == f.terms.size());
                for (int probe = 0; probe < 5; ++probe) {
                    Vec y = rnd_vec(cfg, rng, dim, 9, -2);
                    Fel z = rnd_fel(cfg, rng, 9, -1);
                    Cyc want = evaluate(m.lm, f, mat_apply(q.g, y),
                                        z + q.alpha.value(y));
                    CHECK(evaluate(m.lm, Mf, y, z) == want);
                }

                // single column goes to a single column with a unimodular
                // coefficient
                Vec w = rnd_vec(cfg, rng, dim, 9, -1);
                ModelVector Ms = apply_M(m.lm, splitting(m.ss, g),
                                         make_s(m.lm, w));
                REQUIRE(Ms.terms.size() == 1);
                CHECK(Ms.terms[0].coeff * Ms.terms[0].coeff.conj() ==
                      Cyc::one(p));
                CHECK(vec_eq(Ms.terms[0].rep,
                             coset_rep(m.lm, mat_apply(g, w))));
            }
        }
    }
}

TEST_CASE("membership in the lattice stabilizer and its integral core") {
    Model m2 = model_of(2);
    const FieldConfigPtr& c2 = m2.cfg;
    CHECK(gamma_A_member(m2.lm, Mat::identity(c2, 2)));
    CHECK(gamma_A_circ_member(m2.lm, Mat::identity(c2, 2)));
    CHECK(!gamma_A_member(m2.lm, mat2(c2, 2, 0, 0, Rat(1, 2))));
    CHECK(!gamma_A_member(m2.lm, mat2(c2, 1, Rat(1, 2), 0, 1)));

    // odd unipotent parameters obstruct the quadratic integrality at p = 2
    CHECK(gamma_A_member(m2.lm, mat2(c2, 1, 0, 1, 1)));
    CHECK(!gamma_A_circ_member(m2.lm, mat2(c2, 1, 0, 1, 1)));
    CHECK(gamma_A_member(m2.lm, mat2(c2, 1, 1, 0, 1)));
    CHECK(!gamma_A_circ_member(m2.lm, mat2(c2, 1, 1, 0, 1)));
    CHECK(gamma_A_circ_member(m2.lm, mat2(c2, 1, 2, 0, 1)));
    CHECK(gamma_A_circ_member(m2.lm, mat2(c2, 0, -1, 1, 0)));

    // at an odd prime the quadratic condition is automatic: sample the
    // stabilizer through its finite quotients and observe no exception
    Model m3 = model_of(3);
    const FieldConfigPtr& c3 = m3.cfg;
    std::vector<Mat> gens{mat2(c3, 0, -1, 1, 0), mat2(c3, 1, 1, 0, 1)};
    FiniteLevelGroup grp = sample_group(gens, 2, "sl2", 60);
    for (const Mat& g : grp.elements) {
        CHECK(gamma_A_member(m3.lm, g));
        CHECK(gamma_A_circ_member(m3.lm, g));
    }
}

TEST_CASE("scalar sums collapse to zero or one and decide invertibility") {
    std::mt19937 rng(407);

    // p = 2: an integral element outside the quadratic-integral core kills
    // the whole operator.  The sum runs over a two-element group on which
    // the induced pairing is trivial but the character is not.
    Model m2 = model_of(2);
    const FieldConfigPtr& c2 = m2.cfg;
    Mat bad = mat2(c2, 1, 0, 1, 1);
    PsElement pb = splitting(m2.ss, bad);
    CHECK(gauss_group_order(m2.lm, pb) == Int(2));
    ModelVector s0 = make_s(m2.lm, vec_zero(c2, 2));
    CHECK(mv_is_zero(apply_M(m2.lm, pb, s0)));
    Vec half{Fel::from_rational(c2, Rat(1, 2)), Fel::zero(c2)};
    CHECK(mv_is_zero(apply_M(m2.lm, pb, make_s(m2.lm, half))));

    // inside the core the scalar group is trivial and the basis column
    // through 0 is fixed
    Mat good = mat2(c2, 1, 2, 0, 1);
    PsElement pg = splitting(m2.ss, good);
    CHECK(gauss_group_order(m2.lm, pg) == Int(1));
    CHECK(mv_eq(apply_M(m2.lm, pg, s0), s0));

    // general p = 2 draws obey the exact dichotomy: scalar 1 on a trivial
    // group or identically zero on a nontrivial one
    int trivial = 0, degenerate = 0;
    for (int trial = 0; trial < 12; ++trial) {
        Mat g = rnd_general(c2, rng, 3);
        PsElement q = splitting(m2.ss, g);
        Int order = gauss_group_order(m2.lm, q);
        ModelVector Ms = apply_M(m2.lm, q, s0);
        Cyc G = evaluate(m2.lm, Ms, vec_zero(c2, 2), Fel::zero(c2));
        if (order == Int(1)) {
            CHECK(G == Cyc::one(2));
            ++trivial;
        } else {
            CHECK(G.is_zero());
            CHECK(mv_is_zero(Ms));
            ++degenerate;
        }
    }
    CHECK(trivial > 0);
    CHECK(degenerate > 0);

    // at an odd prime the defect of the quadratic term is divisible by two
    // inside the lattice, so the scalar group is always trivial
    Model m3 = model_of(3);
    const FieldConfigPtr& c3 = m3.cfg;
    ModelVector t0 = make_s(m3.lm, vec_zero(c3, 2));
    for (int trial = 0; trial < 8; ++trial) {
        PsElement q = splitting(m3.ss, rnd_general(c3, rng, 3));
        CHECK(gauss_group_order(m3.lm, q) == Int(1));
        CHECK(evaluate(m3.lm, apply_M(m3.lm, q, t0), vec_zero(c3, 2),
                       Fel::zero(c3)) == Cyc::one(3));
    }
}

TEST_CASE("the operator sum is well defined across coset representatives") {
    std::mt19937 rng(408);
    for (long p : {2L, 3L}) {
        Model m = model_of(p);
        const FieldConfigPtr& cfg = m.cfg;
        for (int trial = 0; trial < 6; ++trial) {
            Mat g = rnd_general(cfg, rng, 3);
            PsElement q = splitting(m.ss, g);
            ModelVector f = rnd_mv(m.lm, rng);

            for (int probe = 0; probe < 4; ++probe) {
                Vec y = rnd_vec(cfg, rng, 2, 9, -1);
                Fel z = rnd_fel(cfg, rng, 9, -1);
                Vec a = rnd_lattice_vec(m.lm, rng);

                Cyc at_y = apply_M_value(m.lm, q, f, y, z);
                Cyc at_ya = apply_M_value(m.lm, q, f, vec_add(y, a), z);
                CHECK(at_ya == psi_c(cfg, -m.ss->beta(a, y)) * at_y);

                // central variable only rotates the value
                CHECK(apply_M_value(m.lm, q, f, y, z) ==
                      psi_c(cfg, z) * apply_M_value(m.lm, q, f, y,
                                                    Fel::zero(cfg)));

                // the canonicalized output evaluates to the defining sum
                CHECK(evaluate(m.lm, apply_M(m.lm, q, f), y, z) == at_y);
            }
        }
    }
}

TEST_CASE("intertwining with right translation") {
    std::mt19937 rng(409);
    for (long p : {2L, 3L}) {
        Model m = model_of(p);
        const FieldConfigPtr& cfg = m.cfg;
        for (int trial = 0; trial < 8; ++trial) {
            Mat g = rnd_general(cfg, rng, 3);
            PsElement q = splitting(m.ss, g);
            HeisenbergElement h{m.ss, rnd_vec(cfg, rng, 2, 9, -1),
                                rnd_fel(cfg, rng, 9, -1)};
            ModelVector f = rnd_mv(m.lm, rng);
            ModelVector lhs = apply_M(m.lm, q, rho_apply(m.lm, h, f));
            ModelVector rhs = rho_apply(m.lm, ps_act_on_heisenberg(q, h),
                                        apply_M(m.lm, q, f));
            CHECK(mv_eq(lhs, rhs));
        }
    }
}

TEST_CASE("composition: exact on the integral core, projective in general") {
    std::mt19937 rng(410);

    for (long p : {2L, 3L}) {
        Model m = model_of(p);
        for (int trial = 0; trial < 5; ++trial) {
            Mat g = rnd_gamma_circ(m.ss, rng), h = rnd_gamma_circ(m.ss, rng);
            ModelVector f = rnd_mv(m.lm, rng);
            ModelVector two = apply_M(m.lm, splitting(m.ss, h),
                                      apply_M(m.lm, splitting(m.ss, g), f));
            PsElement prod = ps_mul(splitting(m.ss, h), splitting(m.ss, g));
            CHECK(mv_eq(two, apply_M(m.lm, prod, f)));
            CHECK(mv_eq(two, apply_M(m.lm, splitting(m.ss, h * g), f)));
        }
    }

    // odd prime: every operator is invertible, so the composite is a unique
    // nonzero multiple of the operator of the product
    Model m3 = model_of(3);
    const FieldConfigPtr& c3 = m3.cfg;
    for (int trial = 0; trial < 5; ++trial) {
        Mat g = rnd_general(c3, rng, 2), h = rnd_general(c3, rng, 2);
        ModelVector f = rnd_mv(m3.lm, rng);
        ModelVector two = apply_M(m3.lm, splitting(m3.ss, h),
                                  apply_M(m3.lm, splitting(m3.ss, g), f));
        ModelVector one = apply_M(m3.lm, ps_mul(splitting(m3.ss, h),
                                                splitting(m3.ss, g)),
                                  f);
        REQUIRE(!mv_is_zero(one));
        REQUIRE(!mv_is_zero(two));
        REQUIRE(two.terms.size() == one.terms.size());
        const Cyc& c0 = two.terms[0].coeff;
        Cyc d0 = term_coeff(m3.lm, one, two.terms[0].rep);
        REQUIRE(!d0.is_zero());
        for (const ModelTerm& t : two.terms) {
            Cyc d = term_coeff(m3.lm, one, t.rep);
            REQUIRE(!d.is_zero());
            CHECK(t.coeff * d0 == d * c0);
        }
    }

    // p = 2: a vanishing factor forces the composite and the product
    // operator to vanish together
    Model m2 = model_of(2);
    const FieldConfigPtr& c2 = m2.cfg;
    Mat bad = mat2(c2, 1, 0, 1, 1), rot = mat2(c2, 1, 2, 0, 1);
    ModelVector f2 = rnd_mv(m2.lm, rng);
    ModelVector comp = apply_M(m2.lm, splitting(m2.ss, rot),
                               apply_M(m2.lm, splitting(m2.ss, bad), f2));
    CHECK(mv_is_zero(comp));
    ModelVector s0 = make_s(m2.lm, vec_zero(c2, 2));
    CHECK(mv_is_zero(apply_M(m2.lm, splitting(m2.ss, rot * bad), s0)));
}

TEST_CASE("finite-level closure of matrix groups") {
    Model m2 = model_of(2);
    const FieldConfigPtr& c2 = m2.cfg;
    Mat S = mat2(c2, 0, -1, 1, 0), T = mat2(c2, 1, 1, 0, 1);

    FiniteLevelGroup g1 = enumerate_group({S, T}, 1, "sl2 mod 2");
    CHECK(g1.elements.size() == 6);
    FiniteLevelGroup g2 = enumerate_group({S, T}, 2, "sl2 mod 4");
    CHECK(g2.elements.size() == 48);
    CHECK(g2.elements[0] == Mat::identity(c2, 2));
    for (const Mat& g : g2.elements) CHECK(is_symplectic_matrix(m2.ss, g));

    // adding a word of the generators does not enlarge the closure
    FiniteLevelGroup g3 = enumerate_group({S, T, S * T * S}, 2, "sl2 mod 4");
    CHECK(g3.elements.size() == 48);

    Model m3 = model_of(3);
    const FieldConfigPtr& c3 = m3.cfg;
    FiniteLevelGroup h1 = enumerate_group(
        {mat2(c3, 0, -1, 1, 0), mat2(c3, 1, 1, 0, 1)}, 1, "sl2 mod 3");
    CHECK(h1.elements.size() == 24);

    CHECK_THROWS_AS(enumerate_group({S, T}, 2, "too small", 10),
                    group_too_large);
    CHECK(sample_group({S, T}, 2, "partial", 10).elements.size() == 10);
    CHECK_THROWS_AS(enumerate_group({mat2(c2, 1, Rat(1, 2), 0, 1)}, 1, "frac"),
                    precondition_violated);
    CHECK_THROWS_AS(enumerate_group({S}, 0, "level"), precondition_violated);
}

TEST_CASE("averaged columns and the support criterion") {
    std::mt19937 rng(412);
    Model m = model_of(2);
    const FieldConfigPtr& cfg = m.cfg;

    // the subgroup generated at parameter 4 stays inside the integral core
    std::vector<Mat> gens{mat2(cfg, 1, 4, 0, 1), mat2(cfg, 1, 0, 4, 1)};
    FiniteLevelGroup grp = enumerate_group(gens, 3, "core congruence");
    REQUIRE(grp.elements.size() >= 4);
    REQUIRE(grp.elements.size() <= 256);
    for (const Mat& u : grp.elements) CHECK(gamma_A_circ_member(m.lm, u));

    // averaging over the trivial group returns the column itself
    FiniteLevelGroup triv = enumerate_group({Mat::identity(cfg, 2)}, 1, "id");
    Vec w = rnd_vec(cfg, rng, 2, 9, -2);
    CHECK(mv_eq(average_s(m.lm, w, triv), make_s(m.lm, w)));

    // the column through 0 is fixed by the whole core, so it survives
    ModelVector s0 = make_s(m.lm, vec_zero(cfg, 2));
    ModelVector avg0 = average_s(m.lm, vec_zero(cfg, 2), grp);
    CHECK(mv_eq(avg0, s0));
    CHECK(nonvanishing_test(m.lm, vec_zero(cfg, 2), grp));

    // a deep fractional point picks up a nontrivial character and cancels
    Vec wf{Fel::zero(cfg), Fel::from_rational(cfg, Rat(1, 2))};
    CHECK(!nonvanishing_test(m.lm, wf, grp));
    CHECK(mv_is_zero(average_s(m.lm, wf, grp)));

    // the support test and the averaged column vanish together, provided
    // the enumeration level is deep enough for the probe point
    std::vector<Vec> probes{
        Vec{Fel::from_rational(cfg, Rat(1, 2)), Fel::zero(cfg)},
        Vec{Fel::from_rational(cfg, Rat(1, 4)), Fel::zero(cfg)},
        rnd_vec(cfg, rng, 2, 9, -2), rnd_lattice_vec(m.lm, rng)};
    for (const Vec& v : probes) {
        long lvl = std::max(grp.level, sufficient_level(m.lm, v));
        FiniteLevelGroup deep = enumerate_group(gens, lvl, "core congruence");
        CHECK(nonvanishing_test(m.lm, v, deep) ==
              !mv_is_zero(average_s(m.lm, v, deep)));
    }

    // the average is fixed by every element that went into it
    size_t limit = std::min<size_t>(grp.elements.size(), 10);
    for (size_t i = 0; i < limit; ++i)
        CHECK(mv_eq(apply_M(m.lm, splitting(m.ss, grp.elements[i]), avg0),
                    avg0));
}

TEST_CASE("model construction guards") {
    Model m = model_of(2);
    CHECK_THROWS_AS(LatticeModel::make(m.ss, m.lm.A.scaled(1)), not_self_dual);
    auto cfg = FieldConfig::make(2, 30, 0);
    auto [sp2, l2] = standard_space(cfg, FormKind::symplectic, 2, 0);
    (void)sp2;
    CHECK_THROWS_AS(LatticeModel::make(m.ss, l2), precondition_violated);
}

TEST_CASE("narrow working precision suffices for the operator identities") {
    std::mt19937 rng(413);
    Model m = model_of(2, 2, 8);
    const FieldConfigPtr& cfg = m.cfg;
    for (int trial = 0; trial < 3; ++trial) {
        Mat g = rnd_general(cfg, rng, 2);
        PsElement q = splitting(m.ss, g);
        ModelVector f = rnd_mv(m.lm, rng);
        HeisenbergElement h{m.ss, rnd_vec(cfg, rng, 2, 5, -1),
                            rnd_fel(cfg, rng, 5, -1)};
        CHECK(mv_eq(apply_M(m.lm, q, rho_apply(m.lm, h, f)),
                    rho_apply(m.lm, ps_act_on_heisenberg(q, h),
                              apply_M(m.lm, q, f))));
        Vec y = rnd_vec(cfg, rng, 2, 5, -1);
        Vec a = rnd_lattice_vec(m.lm, rng, 3);
        Cyc at_y = apply_M_value(m.lm, q, f, y, Fel::zero(cfg));
        Cyc at_ya = apply_M_value(m.lm, q, f, vec_add(y, a), Fel::zero(cfg));
        CHECK(at_ya == psi_c(cfg, -m.ss->beta(a, y)) * at_y);
    }
}
