#pragma once

#include <vector>

#include "weillat/localfield.hpp"

namespace weillat {

// Dense matrix over a fixed local field, row-major.  Vectors are plain
// std::vector<Fel>; free functions below cover the products we need.
class Mat {
public:
    Mat() = default;
    Mat(FieldConfigPtr cfg, int rows, int cols);
    static Mat identity(FieldConfigPtr cfg, int n);
    static Mat from_cols(FieldConfigPtr cfg, const std::vector<std::vector<Fel>>& cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const FieldConfigPtr& config() const { return cfg_; }

    Fel& at(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const Fel& at(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    std::vector<Fel> col(int j) const;
    void set_col(int j, const std::vector<Fel>& v);

    Mat operator+(const Mat& o) const;
    Mat operator-(const Mat& o) const;
    Mat operator*(const Mat& o) const;
    Mat operator-() const;
    Mat scaled(const Fel& c) const;
    Mat shifted(long k) const;  // multiply by pi^k
    Mat transpose() const;
    Mat conj() const;
    Mat conj_transpose() const;
    bool operator==(const Mat& o) const;  // entrywise window agreement

    std::string str() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<Fel> a_;
    FieldConfigPtr cfg_;
};

using Vec = std::vector<Fel>;

Vec vec_zero(FieldConfigPtr cfg, int n);
Vec vec_add(const Vec& x, const Vec& y);
Vec vec_sub(const Vec& x, const Vec& y);
Vec vec_neg(const Vec& x);
Vec vec_scale(const Fel& c, const Vec& x);
Vec vec_shift(const Vec& x, long k);
bool vec_eq(const Vec& x, const Vec& y);
bool vec_is_zero_window(const Vec& x);
Vec mat_apply(const Mat& m, const Vec& x);

// x^T G conj(y): the pairing of coordinate vectors against a Gram matrix,
// linear in x and conjugate-linear in y.
Fel pairing(const Mat& gram, const Vec& x, const Vec& y);

// Minimum valuation over the vector's entries; VAL_INF for the zero vector.
// Throws precision_exhausted if some all-zero window leaves the minimum
// undetermined (i.e. its window top does not exceed the visible minimum).
long vec_min_val(const Vec& x);

// Gauss-Jordan inverse with minimal-valuation pivoting.  Throws
// rank_deficient when no usable pivot remains.
Mat mat_inverse(const Mat& m);
Vec mat_solve(const Mat& m, const Vec& b);
Fel mat_det(const Mat& m);

// Canonical column echelon form over the valuation ring: the module spanned
// by the input columns gets the unique basis matrix whose pivot entries are
// exact powers of pi sitting in strictly increasing rows, with every entry in
// a pivot row reduced to its canonical residue.  Columns that vanish to
// working precision are dropped.  Two column spans are equal iff their
// canonical forms agree entrywise, which makes this the lattice equality
// test.  All entries of the result are exact.
Mat hnf_canonical(const Mat& gens);

// Basis of the right kernel {x : a x = 0} over the field, by elimination
// with minimal-valuation pivoting.  Entries vanishing to precision count
// as zero.
std::vector<Vec> field_kernel(const Mat& a);

// U * diag(pi^d) * V = X with U, V unimodular over the valuation ring and
// d ascending.  uinv, vinv are the exact-op inverses accumulated alongside.
struct SmithForm {
    Mat u, v, uinv, vinv;
    std::vector<long> d;
};
SmithForm smith_form(const Mat& x);

}  // namespace weillat
