#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "weillat/errors.hpp"
#include "weillat/forms.hpp"

using namespace weillat;

namespace {

Fel rnd_fel(const FieldConfigPtr& cfg, std::mt19937& rng, int bound) {
    std::uniform_int_distribution<int> d(-bound, bound);
    if (!cfg->quadratic) return Fel::from_int(cfg, d(rng));
    return Fel::from_pair(cfg, d(rng), d(rng));
}

Vec rnd_vec(const FieldConfigPtr& cfg, std::mt19937& rng, int n, int bound = 9) {
    Vec v;
    for (int i = 0; i < n; ++i) v.push_back(rnd_fel(cfg, rng, bound));
    return v;
}

Mat rnd_full_rank(const FieldConfigPtr& cfg, std::mt19937& rng, int n) {
    std::uniform_int_distribution<int> ex(0, 2), pick(0, n - 1), coef(-4, 4);
    Mat u(cfg, n, n);
    for (int i = 0; i < n; ++i) u.at(i, i) = Fel::pi_pow(cfg, ex(rng));
    for (int step = 0; step < 3 * n; ++step) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        u.set_col(i, vec_add(u.col(i), vec_scale(Fel::from_int(cfg, coef(rng)), u.col(j))));
    }
    return u;
}

FieldConfigPtr cfg_of(long p, bool quad, int K = 30) {
    return quad ? FieldConfig::make(p, K, 0, true, p == 2 ? 1 : 0, 1)
                : FieldConfig::make(p, K, 0);
}

struct CatalogEntry {
    long p;
    bool quad;
    FormKind kind;
    int dim;
    long r;
    AnisoVariant variant;
    int epsilon;
    long eta;
};

std::vector<CatalogEntry> catalog_entries() {
    return {
        {3, false, FormKind::symplectic, 2, 0, AnisoVariant::none, 0, 1},
        {3, false, FormKind::symplectic, 4, 1, AnisoVariant::none, 0, 1},
        {2, false, FormKind::symplectic, 2, 0, AnisoVariant::none, 0, 1},
        {2, false, FormKind::symplectic, 4, -1, AnisoVariant::none, 0, 1},
        {3, false, FormKind::symmetric, 2, 0, AnisoVariant::none, 0, 1},
        {3, false, FormKind::symmetric, 3, 0, AnisoVariant::unit_line, 0, 1},
        {3, false, FormKind::symmetric, 3, 2, AnisoVariant::unit_line, 0, 2},
        {3, false, FormKind::symmetric, 4, 0, AnisoVariant::norm_plane, 0, 1},
        {5, false, FormKind::symmetric, 3, 0, AnisoVariant::unit_line, 0, 3},
        {2, false, FormKind::symmetric, 2, 0, AnisoVariant::none, 0, 1},
        {2, false, FormKind::symmetric, 3, 0, AnisoVariant::unit_line, 0, 1},
        {2, false, FormKind::symmetric, 4, 2, AnisoVariant::norm_plane, 0, 1},
        {3, true, FormKind::hermitian, 2, 0, AnisoVariant::none, 1, 1},
        {3, true, FormKind::hermitian, 2, 1, AnisoVariant::none, -1, 1},
        {3, true, FormKind::hermitian, 3, 0, AnisoVariant::norm_line, 1, 1},
        {3, true, FormKind::hermitian, 3, 0, AnisoVariant::norm_line, -1, 1},
        {2, true, FormKind::hermitian, 2, 0, AnisoVariant::none, 1, 1},
        {2, true, FormKind::hermitian, 3, 2, AnisoVariant::norm_line, -1, 1},
    };
}

}  // namespace

TEST_CASE("catalog spaces are self-dual at their level") {
    for (const auto& ce : catalog_entries()) {
        CAPTURE(ce.p);
        CAPTURE(static_cast<int>(ce.kind));
        CAPTURE(ce.dim);
        CAPTURE(ce.r);
        auto cfg = cfg_of(ce.p, ce.quad);
        auto [sp, l] = standard_space(cfg, ce.kind, ce.dim, ce.r, ce.variant, ce.epsilon, ce.eta);
        CHECK(sp->dim == ce.dim);
        CHECK(dual_lattice(l, ce.r) == l);
        // the ambient form really has the advertised symmetry
        Fel eps = Fel::from_int(cfg, sp->epsilon);
        std::mt19937 rng(17 * ce.p + ce.dim);
        for (int trial = 0; trial < 6; ++trial) {
            Vec v = rnd_vec(cfg, rng, ce.dim), w = rnd_vec(cfg, rng, ce.dim);
            CHECK(sp->form(v, w) == eps * sp->form(w, v).conj());
        }
        ResidueModel rm = residue_space(l, ce.r);
        CHECK(rm.rs.dim == ce.dim);
    }
}

TEST_CASE("catalog constraints are enforced") {
    auto cfg3 = cfg_of(3, false);
    auto cfgq = cfg_of(3, true);
    CHECK_THROWS_AS((void)standard_space(cfg3, FormKind::symmetric, 3, 1, AnisoVariant::unit_line),
                    bad_variant);
    CHECK_THROWS_AS((void)standard_space(cfg3, FormKind::symplectic, 3, 0, AnisoVariant::unit_line),
                    bad_variant);
    CHECK_THROWS_AS((void)standard_space(cfg3, FormKind::symplectic, 3, 0), bad_variant);
    CHECK_THROWS_AS((void)standard_space(cfg3, FormKind::symmetric, 4, 0, AnisoVariant::norm_line),
                    bad_variant);
    CHECK_THROWS_AS(
        (void)standard_space(cfg3, FormKind::symmetric, 3, 0, AnisoVariant::unit_line, 0, 3),
        bad_variant);  // eta must be a unit
    CHECK_THROWS_AS((void)standard_space(cfgq, FormKind::hermitian, 4, 1, AnisoVariant::norm_line),
                    bad_variant);
}

TEST_CASE("dual lattices: scaling, involution, membership") {
    std::mt19937 rng(2024);
    for (const auto& ce : catalog_entries()) {
        auto cfg = cfg_of(ce.p, ce.quad);
        auto [sp, l] = standard_space(cfg, ce.kind, ce.dim, ce.r, ce.variant, ce.epsilon, ce.eta);
        for (long k : {-2L, 1L, 3L})
            CHECK(dual_lattice(l.scaled(k), ce.r) == l.scaled(-k));

        Lattice m = Lattice::from_basis(sp, l.basis() * rnd_full_rank(cfg, rng, ce.dim));
        Lattice md = dual_lattice(m, ce.r);
        CHECK(dual_lattice(md, ce.r) == m);
        // every dual basis vector pairs into P^r against every generator
        for (int i = 0; i < ce.dim; ++i)
            for (int j = 0; j < ce.dim; ++j)
                CHECK(sp->form(md.basis().col(i), m.basis().col(j)).ord_ge(ce.r));
        // and is maximal for that: dividing any basis vector by pi breaks it
        for (int i = 0; i < ce.dim; ++i) {
            Vec shrunk = vec_shift(md.basis().col(i), -1);
            bool still_dual = true;
            for (int j = 0; j < ce.dim; ++j)
                still_dual = still_dual && sp->form(shrunk, m.basis().col(j)).ord_ge(ce.r);
            CHECK(!still_dual);
        }
        // containment is antitone
        Lattice inside = Lattice::from_basis(sp, m.basis() * rnd_full_rank(cfg, rng, ce.dim));
        CHECK(m.contains_lattice(inside));
        CHECK(dual_lattice(inside, ce.r).contains_lattice(md));
    }
}

TEST_CASE("lattice membership, sums, intersections, index") {
    std::mt19937 rng(99);
    for (long p : {2L, 3L}) {
        auto cfg = cfg_of(p, false);
        auto [sp, l] = standard_space(cfg, FormKind::symplectic, 4, 0);
        for (int trial = 0; trial < 8; ++trial) {
            Lattice a = Lattice::from_basis(sp, l.basis() * rnd_full_rank(cfg, rng, 4));
            Lattice b = Lattice::from_basis(sp, l.basis() * rnd_full_rank(cfg, rng, 4));
            Lattice s = a.sum(b), i = a.intersect(b);
            CHECK(s.contains_lattice(a));
            CHECK(s.contains_lattice(b));
            CHECK(a.contains_lattice(i));
            CHECK(b.contains_lattice(i));
            CHECK(a.sum(a) == a);
            CHECK(a.intersect(a) == a);
            // [S:A][A:I] = [S:B][B:I] (both equal [S:I])
            CHECK(s.index_pow(a) + a.index_pow(i) == s.index_pow(b) + b.index_pow(i));
            // a random member of the intersection really sits in both
            Vec c = rnd_vec(cfg, rng, 4, 5);
            Vec v = i.from_coords(c);
            CHECK(a.contains(v));
            CHECK(b.contains(v));
        }
        CHECK(l.index_pow(l.scaled(2)) == 8);
        CHECK_THROWS_AS((void)l.scaled(1).index_pow(l), not_sublattice);
    }
    // quadratic coefficients double the residue count
    auto cfgq = cfg_of(3, true);
    auto [spq, lq] = standard_space(cfgq, FormKind::hermitian, 2, 0, AnisoVariant::none, 1);
    CHECK(lq.index_pow(lq.scaled(1)) == 4);
}

TEST_CASE("valuation against a lattice") {
    auto cfg = cfg_of(3, false);
    auto [sp, l] = standard_space(cfg, FormKind::symplectic, 2, 0);
    Vec e1 = l.basis().col(0);
    CHECK(ord(l, e1) == 0);
    CHECK(ord(l, vec_shift(e1, 3)) == 3);
    CHECK(ord(l, vec_shift(e1, -2)) == -2);
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Vec v = rnd_vec(cfg, rng, 2), w = rnd_vec(cfg, rng, 2);
        long o = std::min(ord(l, v), ord(l, w));
        Vec s = vec_add(v, w);
        if (!vec_is_zero_window(s)) CHECK(ord(l, s) >= o);
    }
}

TEST_CASE("admissibility of sublattices in a polarized space") {
    auto cfg = cfg_of(3, false);
    auto [sp, l] = standard_space(cfg, FormKind::symplectic, 2, 0);
    CHECK(is_admissible(l));
    CHECK(is_admissible(l.scaled(2)));

    // span{e+f, pi e}: the plus projection of e+f escapes
    Mat g(cfg, 2, 2);
    g.at(0, 0) = Fel::one(cfg);
    g.at(1, 0) = Fel::one(cfg);
    g.at(0, 1) = Fel::from_int(cfg, 3);
    CHECK(!is_admissible(Lattice::from_basis(sp, g)));

    // mixed plus/minus scalings stay admissible
    Mat h(cfg, 2, 2);
    h.at(0, 0) = Fel::from_int(cfg, 9);
    h.at(1, 1) = Fel::from_int(cfg, 3);
    CHECK(is_admissible(Lattice::from_basis(sp, h)));

    auto [spa, la] =
        standard_space(cfg, FormKind::symmetric, 3, 0, AnisoVariant::unit_line);
    CHECK_THROWS_AS((void)is_admissible(la), no_split_data);
}

TEST_CASE("residue reduction matches the field form") {
    std::mt19937 rng(414);
    for (const auto& ce : catalog_entries()) {
        auto cfg = cfg_of(ce.p, ce.quad);
        auto [sp, l] = standard_space(cfg, ce.kind, ce.dim, ce.r, ce.variant, ce.epsilon, ce.eta);
        ResidueModel rm = residue_space(l, ce.r);
        for (int trial = 0; trial < 10; ++trial) {
            Vec v = l.from_coords(rnd_vec(cfg, rng, ce.dim));
            Vec w = l.from_coords(rnd_vec(cfg, rng, ce.dim));
            RVec vb = rm.reduce(v), wb = rm.reduce(w);
            // the finite form is the shifted pairing mod pi
            Fel pair = sp->form(v, w).shifted(-ce.r);
            auto digit = pair.frac_pair_below(1);
            RFq expect{static_cast<long>(int_mod(numerator(digit.first), ce.p)),
                       static_cast<long>(int_mod(numerator(digit.second), ce.p))};
            CHECK(rm.rs.form(vb, wb) == expect);
            // reduce is additive and kills pi L
            CHECK(rm.rs.vadd(vb, wb) == rm.reduce(vec_add(v, w)));
            CHECK(rm.reduce(vec_add(v, vec_shift(w, 1))) == vb);
            // lift splits reduce
            CHECK(rm.reduce(rm.lift(vb)) == vb);
        }
        CHECK_THROWS_AS((void)residue_space(l.scaled(1), ce.r), not_self_dual);
    }
    auto cfg = cfg_of(3, false);
    auto [sp, l] = standard_space(cfg, FormKind::symplectic, 2, 0);
    ResidueModel rm = residue_space(l, 0);
    CHECK(rm.rs.gram[0][1] == RFq{1, 0});
    CHECK(rm.rs.gram[1][0] == RFq{2, 0});
    Vec outside{Fel::from_rational(cfg, Rat(1, 3)), Fel::zero(cfg)};
    CHECK_THROWS_AS((void)rm.reduce(outside), precondition_violated);
}

TEST_CASE("coset representatives") {
    auto cfg = cfg_of(2, false);
    auto [sp, l] = standard_space(cfg, FormKind::symplectic, 2, 0);
    std::vector<Vec> reps = quotient_reps(l, l.scaled(1));
    CHECK(reps.size() == 4);
    for (size_t i = 0; i < reps.size(); ++i) {
        CHECK(l.contains(reps[i]));
        for (size_t j = 0; j < i; ++j)
            CHECK(!l.scaled(1).contains(vec_sub(reps[i], reps[j])));
    }
    std::vector<Vec> reps2 = quotient_reps(l, l.scaled(2));
    CHECK(reps2.size() == 16);

    auto cfgq = cfg_of(3, true);
    auto [spq, lq] = standard_space(cfgq, FormKind::hermitian, 2, 0, AnisoVariant::none, 1);
    CHECK(quotient_reps(lq, lq.scaled(1)).size() == 81);
    CHECK_THROWS_AS((void)quotient_reps(lq.scaled(1), lq), not_sublattice);
}

TEST_CASE("isometries act on lattices the way they act on vectors") {
    std::mt19937 rng(55);
    auto cfg = cfg_of(3, false);
    auto [sp, l] = standard_space(cfg, FormKind::symplectic, 2, 0);

    Mat bad(cfg, 2, 2);
    bad.at(0, 0) = Fel::from_int(cfg, 2);
    bad.at(1, 1) = Fel::one(cfg);
    CHECK_THROWS_AS((void)IsometryElement::make(sp, bad), precondition_violated);

    // upper and lower unipotents generate plenty of isometries
    auto unipotent = [&](bool upper, long x) {
        Mat u = Mat::identity(cfg, 2);
        u.at(upper ? 0 : 1, upper ? 1 : 0) = Fel::from_int(cfg, x);
        return IsometryElement::make(sp, u);
    };
    std::uniform_int_distribution<long> xs(-9, 9);
    for (int trial = 0; trial < 10; ++trial) {
        IsometryElement u = unipotent(true, xs(rng)).compose(unipotent(false, xs(rng)));
        IsometryElement ui = u.inverse();
        Vec v = rnd_vec(cfg, rng, 2);
        CHECK(vec_eq(ui.apply(u.apply(v)), v));
        CHECK(u.map_lattice(l) == l);

        Lattice m = Lattice::from_basis(sp, l.basis() * rnd_full_rank(cfg, rng, 2));
        Lattice um = u.map_lattice(m);
        // duality commutes with the action
        CHECK(dual_lattice(um, 0) == u.map_lattice(dual_lattice(m, 0)));
        CHECK(ui.map_lattice(um) == m);
    }
}
