#include "weillat/residue.hpp"

#include <stdexcept>

#include "weillat/errors.hpp"

namespace weillat {

namespace {
long md(long x, long p) { return ((x % p) + p) % p; }
}

RFq ResidueSpace::make(long a, long b) const {
    if (b != 0 && !quadratic)
        throw precondition_violated("residue: wbar part over prime field");
    return {md(a, p), md(b, p)};
}

RFq ResidueSpace::add(RFq x, RFq y) const { return {md(x.a + y.a, p), md(x.b + y.b, p)}; }
RFq ResidueSpace::sub(RFq x, RFq y) const { return {md(x.a - y.a, p), md(x.b - y.b, p)}; }
RFq ResidueSpace::neg(RFq x) const { return {md(-x.a, p), md(-x.b, p)}; }

RFq ResidueSpace::mul(RFq x, RFq y) const {
    // wbar^2 = -mb wbar - mc
    long a = x.a * y.a - mc * (x.b * y.b);
    long b = x.a * y.b + x.b * y.a - mb * (x.b * y.b);
    return {md(a, p), md(b, p)};
}

RFq ResidueSpace::conj(RFq x) const {
    if (!quadratic) return x;
    return {md(x.a - mb * x.b, p), md(-x.b, p)};
}

RFq ResidueSpace::inv(RFq x) const {
    if (is_zero(x)) throw std::domain_error("residue inv: zero");
    if (!quadratic) return {static_cast<long>(inv_mod(x.a, p)), 0};
    long n = md(x.a * x.a - mb * x.a * x.b + mc * x.b * x.b, p);
    long ni = static_cast<long>(inv_mod(n, p));
    RFq c = conj(x);
    return {md(c.a * ni, p), md(c.b * ni, p)};
}

RFq ResidueSpace::element_at(long idx) const {
    if (!quadratic) return {md(idx, p), 0};
    return {idx % p, idx / p};
}

RFq ResidueSpace::trace_solve(RFq n) const {
    if (!quadratic) {
        if (p == 2) throw precondition_violated("trace_solve: halving in residue char 2");
        return {md(n.a * static_cast<long>(inv_mod(2, p)), p), 0};
    }
    // theta = wbar / tr(wbar) has trace 1; tr(wbar) = -mb must be a unit,
    // which irreducibility of the minimal polynomial guarantees at p = 2.
    if (md(mb, p) == 0) {
        if (p == 2) throw precondition_violated("trace_solve: tr(wbar) = 0");
        return mul(n, make(static_cast<long>(inv_mod(2, p))));
    }
    RFq theta = mul(make(0, 1), make(static_cast<long>(inv_mod(md(-mb, p), p))));
    return mul(n, theta);
}

RFq ResidueSpace::skew_solve(RFq n) const {
    if (!quadratic) throw precondition_violated("skew_solve: needs a quadratic residue field");
    // theta = wbar / (wbar - conj(wbar)) satisfies theta - conj(theta) = 1;
    // wbar - conj(wbar) = 2 wbar + mb is a unit (its norm is the discriminant).
    RFq eta = add(make(mb, 0), make(0, 2));
    return mul(n, mul(make(0, 1), inv(eta)));
}

RVec ResidueSpace::vadd(const RVec& x, const RVec& y) const {
    RVec r(x);
    for (size_t i = 0; i < r.size(); ++i) r[i] = add(r[i], y[i]);
    return r;
}

RVec ResidueSpace::vsub(const RVec& x, const RVec& y) const {
    RVec r(x);
    for (size_t i = 0; i < r.size(); ++i) r[i] = sub(r[i], y[i]);
    return r;
}

RVec ResidueSpace::vscale(RFq c, const RVec& x) const {
    RVec r(x);
    for (auto& e : r) e = mul(c, e);
    return r;
}

bool ResidueSpace::vis_zero(const RVec& x) const {
    for (const auto& e : x)
        if (!is_zero(e)) return false;
    return true;
}

RFq ResidueSpace::form(const RVec& x, const RVec& y) const {
    RFq s = zero();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            s = add(s, mul(x[i], mul(gram[i][j], conj(y[j]))));
    return s;
}

Int ResidueSpace::vector_count(int d) const {
    Int n = 1;
    for (int i = 0; i < d; ++i) n *= field_size();
    return n;
}

RVec ResidueSpace::vector_at(const Int& idx, int d) const {
    RVec v(d);
    Int rest = idx;
    long q = field_size();
    for (int i = 0; i < d; ++i) {
        v[i] = element_at(static_cast<long>(rest % q));
        rest /= q;
    }
    return v;
}

bool ResidueSpace::solve_linear(const std::vector<RVec>& rows, const RVec& rhs,
                                RVec* out) const {
    int nc = rows.empty() ? static_cast<int>(rhs.size()) : static_cast<int>(rows[0].size());
    std::vector<RVec> m;
    for (size_t i = 0; i < rows.size(); ++i) {
        RVec row = rows[i];
        row.push_back(rhs[i]);
        m.push_back(row);
    }
    std::vector<int> piv;
    size_t rr = 0;
    for (int c = 0; c < nc && rr < m.size(); ++c) {
        size_t sel = rr;
        while (sel < m.size() && is_zero(m[sel][c])) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[rr], m[sel]);
        RFq s = inv(m[rr][c]);
        for (int j = 0; j <= nc; ++j) m[rr][j] = mul(s, m[rr][j]);
        for (size_t i = 0; i < m.size(); ++i) {
            if (i == rr || is_zero(m[i][c])) continue;
            RFq f = m[i][c];
            for (int j = 0; j <= nc; ++j) m[i][j] = sub(m[i][j], mul(f, m[rr][j]));
        }
        piv.push_back(c);
        ++rr;
    }
    for (size_t i = rr; i < m.size(); ++i)
        if (!is_zero(m[i][nc])) return false;
    if (out) {
        RVec x(nc);
        for (size_t i = 0; i < piv.size(); ++i) x[piv[i]] = m[i][nc];
        *out = x;
    }
    return true;
}

std::vector<RVec> ResidueSpace::kernel_basis(const std::vector<RVec>& rows, int ncols) const {
    std::vector<RVec> m = rows;
    std::vector<int> piv;
    size_t rr = 0;
    for (int c = 0; c < ncols && rr < m.size(); ++c) {
        size_t sel = rr;
        while (sel < m.size() && is_zero(m[sel][c])) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[rr], m[sel]);
        RFq s = inv(m[rr][c]);
        for (int j = 0; j < ncols; ++j) m[rr][j] = mul(s, m[rr][j]);
        for (size_t i = 0; i < m.size(); ++i) {
            if (i == rr || is_zero(m[i][c])) continue;
            RFq f = m[i][c];
            for (int j = 0; j < ncols; ++j) m[i][j] = sub(m[i][j], mul(f, m[rr][j]));
        }
        piv.push_back(c);
        ++rr;
    }
    std::vector<RVec> ker;
    std::vector<bool> is_piv(ncols, false);
    for (int c : piv) is_piv[c] = true;
    for (int c = 0; c < ncols; ++c) {
        if (is_piv[c]) continue;
        RVec v(ncols);
        v[c] = one();
        for (size_t i = 0; i < piv.size(); ++i) v[piv[i]] = neg(m[i][c]);
        ker.push_back(v);
    }
    return ker;
}

int ResidueSpace::rank(const std::vector<RVec>& rows, int ncols) const {
    return ncols - static_cast<int>(kernel_basis(rows, ncols).size());
}

bool ResidueSpace::independent(const std::vector<RVec>& vecs) const {
    if (vecs.empty()) return true;
    // columns of the matrix are the vectors
    std::vector<RVec> rows(vecs[0].size(), RVec(vecs.size()));
    for (size_t j = 0; j < vecs.size(); ++j)
        for (size_t i = 0; i < vecs[j].size(); ++i) rows[i][j] = vecs[j][i];
    return rank(rows, static_cast<int>(vecs.size())) == static_cast<int>(vecs.size());
}

}  // namespace weillat
