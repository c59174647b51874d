#pragma once

#include <vector>

#include "weillat/bigint.hpp"

namespace weillat {

enum class FormKind { symplectic, symmetric, hermitian };

// Element of the residue field: a + b*wbar with 0 <= a,b < p, and b = 0
// identically when the field is prime.
struct RFq {
    long a = 0, b = 0;
    bool operator==(const RFq&) const = default;
};

using RVec = std::vector<RFq>;

// A finite epsilon-Hermitian space over the residue field, carrying the
// reduced form of a self-dual lattice.  Field arithmetic is exposed as
// methods so the defining data (p, and the minimal polynomial residues for
// the quadratic case) stays in one place.
class ResidueSpace {
public:
    long p = 2;
    bool quadratic = false;
    long mb = 0, mc = 0;  // x^2 + mb x + mc mod p, when quadratic
    FormKind kind = FormKind::symplectic;
    int epsilon = -1;
    int dim = 0;
    std::vector<RVec> gram;

    // field arithmetic
    RFq zero() const { return {0, 0}; }
    RFq one() const { return {1, 0}; }
    RFq make(long a, long b = 0) const;
    RFq add(RFq x, RFq y) const;
    RFq sub(RFq x, RFq y) const;
    RFq neg(RFq x) const;
    RFq mul(RFq x, RFq y) const;
    RFq conj(RFq x) const;
    RFq inv(RFq x) const;  // throws domain_error on zero
    bool is_zero(RFq x) const { return x.a == 0 && x.b == 0; }

    long field_size() const { return quadratic ? p * p : p; }
    RFq element_at(long idx) const;  // idx in [0, field_size)

    // Solutions of the two conjugation equations used to repair isotropy:
    // trace_solve(n): a with a + conj(a) = n   (needs conj(n) = n)
    // skew_solve(n):  a with a - conj(a) = n   (needs conj(n) = -n; quadratic only)
    RFq trace_solve(RFq n) const;
    RFq skew_solve(RFq n) const;

    // vectors
    RVec vzero() const { return RVec(dim); }
    RVec vadd(const RVec& x, const RVec& y) const;
    RVec vsub(const RVec& x, const RVec& y) const;
    RVec vscale(RFq c, const RVec& x) const;
    bool vis_zero(const RVec& x) const;
    RFq form(const RVec& x, const RVec& y) const;  // sum x_i gram_ij conj(y_j)

    Int vector_count(int d) const;       // field_size^d
    RVec vector_at(const Int& idx, int d) const;

    // Gaussian elimination over the field.  rows is a list of length-ncols
    // rows; returns one solution of rows * x = rhs, or false.
    bool solve_linear(const std::vector<RVec>& rows, const RVec& rhs,
                      RVec* out) const;
    std::vector<RVec> kernel_basis(const std::vector<RVec>& rows, int ncols) const;
    int rank(const std::vector<RVec>& rows, int ncols) const;
    bool independent(const std::vector<RVec>& vecs) const;
};

}  // namespace weillat
