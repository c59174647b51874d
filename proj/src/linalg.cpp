#include "weillat/linalg.hpp"

#include <algorithm>
#include <sstream>

#include "weillat/errors.hpp"

namespace weillat {

namespace {

// Valuation if the window shows a nonzero digit, VAL_INF if the entry is
// exact zero or vanishes to precision.  Pivot search treats invisible
// entries as zero; the fixed-window regime makes this the only option.
long visible_val(const Fel& x) {
    if (x.is_exact_zero() || x.is_zero_window()) return VAL_INF;
    return x.val();
}

// Exact canonical residue of the digits strictly below position m.
Fel residue_below(const Fel& x, long m) {
    auto [ra, rb] = x.frac_pair_below(m);
    return Fel::from_pair(x.config(), ra, rb);
}

}  // namespace

Mat::Mat(FieldConfigPtr cfg, int rows, int cols)
    : rows_(rows), cols_(cols),
      a_(static_cast<size_t>(rows) * cols, Fel::zero(cfg)),
      cfg_(std::move(cfg)) {}

Mat Mat::identity(FieldConfigPtr cfg, int n) {
    Mat m(cfg, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Fel::one(cfg);
    return m;
}

Mat Mat::from_cols(FieldConfigPtr cfg, const std::vector<std::vector<Fel>>& cols) {
    int n = cols.empty() ? 0 : static_cast<int>(cols[0].size());
    Mat m(cfg, n, static_cast<int>(cols.size()));
    for (int j = 0; j < m.cols_; ++j) {
        if (static_cast<int>(cols[j].size()) != n)
            throw precondition_violated("from_cols: ragged columns");
        for (int i = 0; i < n; ++i) m.at(i, j) = cols[j][i];
    }
    return m;
}

std::vector<Fel> Mat::col(int j) const {
    std::vector<Fel> v;
    v.reserve(rows_);
    for (int i = 0; i < rows_; ++i) v.push_back(at(i, j));
    return v;
}

void Mat::set_col(int j, const std::vector<Fel>& v) {
    for (int i = 0; i < rows_; ++i) at(i, j) = v[i];
}

Mat Mat::operator+(const Mat& o) const {
    Mat m(cfg_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] + o.a_[k];
    return m;
}

Mat Mat::operator-(const Mat& o) const {
    Mat m(cfg_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] - o.a_[k];
    return m;
}

Mat Mat::operator-() const {
    Mat m(cfg_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = -a_[k];
    return m;
}

Mat Mat::operator*(const Mat& o) const {
    if (cols_ != o.rows_) throw precondition_violated("mat mul: shape mismatch");
    Mat m(cfg_, rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < o.cols_; ++j) {
            Fel s = Fel::zero(cfg_);
            for (int k = 0; k < cols_; ++k) s = s + at(i, k) * o.at(k, j);
            m.at(i, j) = s;
        }
    return m;
}

Mat Mat::scaled(const Fel& c) const {
    Mat m(cfg_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] * c;
    return m;
}

Mat Mat::shifted(long k) const {
    Mat m(cfg_, rows_, cols_);
    for (size_t t = 0; t < a_.size(); ++t) m.a_[t] = a_[t].shifted(k);
    return m;
}

Mat Mat::transpose() const {
    Mat m(cfg_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) m.at(j, i) = at(i, j);
    return m;
}

Mat Mat::conj() const {
    Mat m(cfg_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k].conj();
    return m;
}

Mat Mat::conj_transpose() const { return conj().transpose(); }

bool Mat::operator==(const Mat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) return false;
    for (size_t k = 0; k < a_.size(); ++k)
        if (!(a_[k] == o.a_[k])) return false;
    return true;
}

std::string Mat::str() const {
    std::ostringstream os;
    for (int i = 0; i < rows_; ++i) {
        os << (i ? "\n[" : "[");
        for (int j = 0; j < cols_; ++j) os << (j ? ", " : "") << at(i, j).str();
        os << "]";
    }
    return os.str();
}

Vec vec_zero(FieldConfigPtr cfg, int n) { return Vec(n, Fel::zero(cfg)); }

Vec vec_add(const Vec& x, const Vec& y) {
    Vec r(x);
    for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] + y[i];
    return r;
}

Vec vec_sub(const Vec& x, const Vec& y) {
    Vec r(x);
    for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] - y[i];
    return r;
}

Vec vec_neg(const Vec& x) {
    Vec r(x);
    for (auto& e : r) e = -e;
    return r;
}

Vec vec_scale(const Fel& c, const Vec& x) {
    Vec r(x);
    for (auto& e : r) e = c * e;
    return r;
}

Vec vec_shift(const Vec& x, long k) {
    Vec r(x);
    for (auto& e : r) e = e.shifted(k);
    return r;
}

bool vec_eq(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
        if (!(x[i] == y[i])) return false;
    return true;
}

bool vec_is_zero_window(const Vec& x) {
    for (const auto& e : x)
        if (!e.is_exact_zero() && !e.is_zero_window()) return false;
    return true;
}

Vec mat_apply(const Mat& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.cols())
        throw precondition_violated("mat_apply: shape mismatch");
    Vec r = vec_zero(m.config(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r[i] = r[i] + m.at(i, j) * x[j];
    return r;
}

Fel pairing(const Mat& gram, const Vec& x, const Vec& y) {
    Fel s = Fel::zero(gram.config());
    for (int i = 0; i < gram.rows(); ++i)
        for (int j = 0; j < gram.cols(); ++j)
            s = s + x[i] * gram.at(i, j) * y[j].conj();
    return s;
}

long vec_min_val(const Vec& x) {
    long best = VAL_INF;
    long cover = VAL_INF;  // smallest window top among invisible entries
    for (const auto& e : x) {
        if (e.is_exact_zero()) continue;
        if (e.is_zero_window()) {
            cover = std::min(cover, e.lo() + e.digits_kept());
        } else {
            best = std::min(best, e.val());
        }
    }
    if (best == VAL_INF && cover == VAL_INF) return VAL_INF;
    if (best < cover) return best;
    throw precision_exhausted("vec_min_val: window hides the minimum");
}

Mat mat_inverse(const Mat& m) {
    if (m.rows() != m.cols()) throw precondition_violated("mat_inverse: not square");
    int n = m.rows();
    Mat a = m, inv = Mat::identity(m.config(), n);
    for (int t = 0; t < n; ++t) {
        int piv = -1;
        long pv = VAL_INF;
        for (int i = t; i < n; ++i) {
            long v = visible_val(a.at(i, t));
            if (v < pv) { pv = v; piv = i; }
        }
        if (piv < 0) throw rank_deficient("mat_inverse: no pivot");
        for (int j = 0; j < n; ++j) {
            std::swap(a.at(t, j), a.at(piv, j));
            std::swap(inv.at(t, j), inv.at(piv, j));
        }
        Fel s = a.at(t, t).inv();
        for (int j = 0; j < n; ++j) {
            a.at(t, j) = (s * a.at(t, j)).normalized();
            inv.at(t, j) = (s * inv.at(t, j)).normalized();
        }
        for (int i = 0; i < n; ++i) {
            if (i == t) continue;
            Fel c = a.at(i, t).normalized();
            if (c.is_exact_zero()) continue;
            for (int j = 0; j < n; ++j) {
                a.at(i, j) = (a.at(i, j) - c * a.at(t, j)).normalized();
                inv.at(i, j) = (inv.at(i, j) - c * inv.at(t, j)).normalized();
            }
        }
    }
    return inv;
}

Vec mat_solve(const Mat& m, const Vec& b) { return mat_apply(mat_inverse(m), b); }

Fel mat_det(const Mat& m) {
    if (m.rows() != m.cols()) throw precondition_violated("mat_det: not square");
    int n = m.rows();
    Mat a = m;
    Fel det = Fel::one(m.config());
    for (int t = 0; t < n; ++t) {
        int piv = -1;
        long pv = VAL_INF;
        for (int i = t; i < n; ++i) {
            long v = visible_val(a.at(i, t));
            if (v < pv) { pv = v; piv = i; }
        }
        if (piv < 0) return Fel::zero(m.config());
        if (piv != t) {
            for (int j = 0; j < n; ++j) std::swap(a.at(t, j), a.at(piv, j));
            det = -det;
        }
        det = det * a.at(t, t);
        Fel s = a.at(t, t).inv();
        for (int i = t + 1; i < n; ++i) {
            Fel c = (s * a.at(i, t)).normalized();
            if (c.is_exact_zero()) continue;
            for (int j = t; j < n; ++j) a.at(i, j) = (a.at(i, j) - c * a.at(t, j)).normalized();
        }
    }
    return det;
}

Mat hnf_canonical(const Mat& gens) {
    FieldConfigPtr cfg = gens.config();
    int n = gens.rows();
    std::vector<Vec> alive;
    for (int j = 0; j < gens.cols(); ++j) {
        Vec c = gens.col(j);
        for (auto& e : c) e = e.normalized();
        alive.push_back(std::move(c));
    }

    // Bottom-up elimination: pick the minimal-valuation entry in each row as
    // pivot, normalize its column to leading coefficient pi^a, clear the row
    // from every other column.  Windows are renormalized after every update;
    // otherwise accumulated leading zeros destroy the certified digit range
    // of later products.
    struct PivCol { int row; long a; Vec col; };
    std::vector<PivCol> pivots;
    for (int i = n - 1; i >= 0; --i) {
        int jmin = -1;
        long vmin = VAL_INF;
        for (size_t j = 0; j < alive.size(); ++j) {
            long v = visible_val(alive[j][i]);
            if (v < vmin) { vmin = v; jmin = static_cast<int>(j); }
        }
        if (jmin < 0) continue;
        Vec piv = alive[jmin];
        alive.erase(alive.begin() + jmin);
        Fel unit_inv = piv[i].shifted(-vmin).inv();
        piv = vec_scale(unit_inv, piv);
        for (auto& e : piv) e = e.normalized();
        for (auto& c : alive) {
            Fel q = c[i].shifted(-vmin).normalized();
            if (q.is_exact_zero() || q.is_zero_window()) continue;
            c = vec_sub(c, vec_scale(q, piv));
            for (auto& e : c) e = e.normalized();
        }
        pivots.push_back({i, vmin, std::move(piv)});
    }

    std::sort(pivots.begin(), pivots.end(),
              [](const PivCol& a, const PivCol& b) { return a.row < b.row; });
    int m = static_cast<int>(pivots.size());
    long amax = 0;
    for (const auto& pc : pivots) amax = std::max(amax, pc.a);

    // A window certifying zero only up to amax could hide module-relevant
    // digits, so both residual generators and frozen zero entries must be
    // certified strictly beyond every pivot exponent.
    auto certified_zero = [&](const Fel& e) {
        if (e.is_exact_zero()) return true;
        if (!e.is_zero_window()) return false;
        if (e.lo() + e.digits_kept() < amax + 1)
            throw precision_exhausted("hnf: zero window too short to certify");
        return true;
    };
    for (const auto& c : alive)
        for (const auto& e : c)
            if (!certified_zero(e))
                throw precision_exhausted("hnf: residual column not certified zero");

    // Reduce every entry sitting in an earlier pivot row to its canonical
    // residue, nearest pivot first so already-reduced rows stay put.  The
    // residues are recorded and frozen directly: the column windows may no
    // longer show them after later subtractions.
    std::vector<std::vector<Fel>> res_at(m);
    for (int t = 0; t < m; ++t) {
        res_at[t].assign(t, Fel::zero(cfg));
        for (int s = t - 1; s >= 0; --s) {
            const Fel& e = pivots[t].col[pivots[s].row];
            Fel res = residue_below(e, pivots[s].a);
            res_at[t][s] = res;
            Fel q = (e - res).shifted(-pivots[s].a).normalized();
            if (q.is_exact_zero() || q.is_zero_window()) continue;
            pivots[t].col = vec_sub(pivots[t].col, vec_scale(q, pivots[s].col));
            for (auto& x : pivots[t].col) x = x.normalized();
        }
    }

    // Freeze the result: pivot entries become exact powers of pi, recorded
    // residues land in the earlier pivot rows, rows without a pivot keep
    // their visible digits, and everything else is exact zero.
    std::vector<int> pivot_of_row(n, -1);
    for (int s = 0; s < m; ++s) pivot_of_row[pivots[s].row] = s;
    Mat b(cfg, n, m);
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < pivots[t].row; ++i) {
            int s = pivot_of_row[i];
            if (s >= 0) {
                b.at(i, t) = res_at[t][s];
                continue;
            }
            const Fel& e = pivots[t].col[i];
            if (certified_zero(e)) continue;
            b.at(i, t) = residue_below(e, e.lo() + e.digits_kept());
        }
        for (int i = pivots[t].row + 1; i < n; ++i) (void)certified_zero(pivots[t].col[i]);
        b.at(pivots[t].row, t) = Fel::pi_pow(cfg, pivots[t].a);
    }
    return b;
}

std::vector<Vec> field_kernel(const Mat& a) {
    int m = a.rows(), n = a.cols();
    Mat w = a;
    std::vector<int> piv_col;
    int rr = 0;
    for (int c = 0; c < n && rr < m; ++c) {
        int sel = -1;
        long pv = VAL_INF;
        for (int i = rr; i < m; ++i) {
            long v = visible_val(w.at(i, c));
            if (v < pv) { pv = v; sel = i; }
        }
        if (sel < 0) continue;
        for (int j = 0; j < n; ++j) std::swap(w.at(rr, j), w.at(sel, j));
        Fel s = w.at(rr, c).inv();
        for (int j = 0; j < n; ++j) w.at(rr, j) = s * w.at(rr, j);
        for (int i = 0; i < m; ++i) {
            if (i == rr) continue;
            Fel f = w.at(i, c);
            if (f.is_exact_zero()) continue;
            for (int j = 0; j < n; ++j) w.at(i, j) = w.at(i, j) - f * w.at(rr, j);
        }
        piv_col.push_back(c);
        ++rr;
    }
    std::vector<bool> is_piv(n, false);
    for (int c : piv_col) is_piv[c] = true;
    std::vector<Vec> ker;
    for (int c = 0; c < n; ++c) {
        if (is_piv[c]) continue;
        Vec v = vec_zero(a.config(), n);
        v[c] = Fel::one(a.config());
        for (size_t i = 0; i < piv_col.size(); ++i) v[piv_col[i]] = -w.at(static_cast<int>(i), c);
        ker.push_back(v);
    }
    return ker;
}

SmithForm smith_form(const Mat& x) {
    FieldConfigPtr cfg = x.config();
    int m = x.rows(), n = x.cols();
    Mat a = x;
    Mat u = Mat::identity(cfg, m), uinv = Mat::identity(cfg, m);
    Mat v = Mat::identity(cfg, n), vinv = Mat::identity(cfg, n);

    auto swap_rows = [&](int i1, int i2) {
        if (i1 == i2) return;
        for (int j = 0; j < n; ++j) std::swap(a.at(i1, j), a.at(i2, j));
        for (int j = 0; j < m; ++j) std::swap(u.at(j, i1), u.at(j, i2));
        for (int j = 0; j < m; ++j) std::swap(uinv.at(i1, j), uinv.at(i2, j));
    };
    auto swap_cols = [&](int j1, int j2) {
        if (j1 == j2) return;
        for (int i = 0; i < m; ++i) std::swap(a.at(i, j1), a.at(i, j2));
        for (int i = 0; i < n; ++i) std::swap(v.at(j1, i), v.at(j2, i));
        for (int i = 0; i < n; ++i) std::swap(vinv.at(i, j1), vinv.at(i, j2));
    };
    // a <- (row i1) -= c * (row i2), keeping x = u a v and uinv = u^-1.
    auto row_op = [&](int i1, const Fel& c, int i2) {
        for (int j = 0; j < n; ++j) a.at(i1, j) = a.at(i1, j) - c * a.at(i2, j);
        for (int j = 0; j < m; ++j) u.at(j, i2) = u.at(j, i2) + c * u.at(j, i1);
        for (int j = 0; j < m; ++j) uinv.at(i1, j) = uinv.at(i1, j) - c * uinv.at(i2, j);
    };
    auto col_op = [&](int j1, const Fel& c, int j2) {
        for (int i = 0; i < m; ++i) a.at(i, j1) = a.at(i, j1) - c * a.at(i, j2);
        for (int i = 0; i < n; ++i) v.at(j2, i) = v.at(j2, i) + c * v.at(j1, i);
        for (int i = 0; i < n; ++i) vinv.at(i, j1) = vinv.at(i, j1) - c * vinv.at(i, j2);
    };
    auto scale_row = [&](int i, const Fel& s) {
        Fel si = s.inv();
        for (int j = 0; j < n; ++j) a.at(i, j) = s * a.at(i, j);
        for (int j = 0; j < m; ++j) u.at(j, i) = si * u.at(j, i);
        for (int j = 0; j < m; ++j) uinv.at(i, j) = s * uinv.at(i, j);
    };

    std::vector<long> d;
    int t = 0;
    for (; t < std::min(m, n); ++t) {
        int pi_ = -1, pj = -1;
        long pv = VAL_INF;
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j) {
                long w = visible_val(a.at(i, j));
                if (w < pv) { pv = w; pi_ = i; pj = j; }
            }
        if (pi_ < 0) break;
        swap_rows(t, pi_);
        swap_cols(t, pj);
        scale_row(t, a.at(t, t).shifted(-pv).inv());
        for (int i = t + 1; i < m; ++i) {
            Fel c = a.at(i, t).shifted(-pv).normalized();
            if (!c.is_exact_zero() && !c.is_zero_window()) row_op(i, c, t);
        }
        for (int j = t + 1; j < n; ++j) {
            Fel c = a.at(t, j).shifted(-pv).normalized();
            if (!c.is_exact_zero() && !c.is_zero_window()) col_op(j, c, t);
        }
        for (Mat* w : {&a, &u, &uinv, &v, &vinv})
            for (int i = 0; i < w->rows(); ++i)
                for (int j = 0; j < w->cols(); ++j) w->at(i, j) = w->at(i, j).normalized();
        d.push_back(pv);
    }

    SmithForm sf;
    sf.d = d;
    sf.u = std::move(u);
    sf.uinv = std::move(uinv);
    sf.v = std::move(v);
    sf.vinv = std::move(vinv);
    return sf;
}

}  // namespace weillat
