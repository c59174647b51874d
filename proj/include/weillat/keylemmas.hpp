#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weillat/dualpair.hpp"
#include "weillat/latticealg.hpp"

namespace weillat {

// Solvers for the structural facts the dual-pair calculus runs on: the
// support filtration and its descent, transfer of maximal support vectors
// across the stabilizer, conductor search for finite-quotient
// representations, and the finite index / commutant consistency checks.
// Each constructive solver returns a certificate recording the congruences
// it verified along the way; certificates serialize to JSON for reporting.

using RatMat = std::vector<std::vector<Rat>>;

// --- support filtration -------------------------------------------------

// Level-t window condition relative to a sublattice L of L1: the support
// representative w satisfies pi^{-r1} w(2piL1 cap L) <= pi^{-t} L2.
bool window_condition(const DualPairContext& ctx, const Lattice& l,
                      const TensorVector& w, long t);

// Whether every support representative of f satisfies the level-t window
// condition.  The filtration is increasing in t.
bool s_t_membership(const DualPairContext& ctx, const Lattice& l,
                    const ModelVector& f, long t);

struct DescentInstance {
    DualPairContext context;
    Lattice l;        // sublattice of L1
    TensorVector w;   // satisfies the level-t window condition, nonvanishing
    long t = 0;
};

struct DescentCertificate {
    long t = 0;
    long required_ord = 0;            // r2 + t + 1
    std::vector<int> picked;          // basis indices of 2piL1 cap L used
    std::vector<Vec> images;          // pi^{t-r1} w(x_i), independent mod pi
    int rank = 0;                     // size of the picked family
    bool gram_congruent = false;      // image Gram lies in P^{required_ord}
    bool post_verified = false;       // transported support passed level t-1
    std::string json() const;
};

// One step down the filtration: u in U(V2), scaling the perturbed span by
// pi and its paired complement by pi^{-1}, with omega(u~) s_w in S_{t-1}.
std::pair<IsometryElement, DescentCertificate> descent_step(
    const DescentInstance& inst);

// --- transfer across the stabilizer -------------------------------------

struct Key2Instance {
    DualPairContext context;
    Lattice l;        // sublattice of L1, adapted exponents >= 1 + e
    TensorVector w;   // in B(L), maximal at L
    TensorVector wprime;  // same, with matching support character
};

struct Key2Certificate {
    int s = 0;                      // unimodular rank of the adapted basis
    std::vector<long> exps;         // adapted exponents past s
    std::vector<std::vector<long>> congruence_need;  // required Gram depth
    bool gram_congruent = false;
    std::vector<std::string> probe_values;  // harvested character pairs
    bool probes_agree = false;
    bool k_member = false;          // k lands in the lattice stabilizer
    bool a_member = false;          // a lands in A
    bool round_trip = false;        // w' + a = k w holds exactly
    long required_window = 0;       // working precision the probes needed
    std::string json() const;
};

struct Key2Solution {
    IsometryElement k;
    Vec a;  // element of A, as a tensor-coordinate vector
    Key2Certificate certificate;
};

// Both vectors maximal at L with equal support characters: produces k in
// K2 and a in A with w' + a = k w.  L needs V2 symplectic and the
// polarization along the second factor.
Key2Solution key2_solve_L(const Key2Instance& inst);

// Mirror solver for L = pi^k L1 with dim V1 = dim V2: reads the vectors as
// maps out of V2 against M = pi^k L2 and produces k in K1, a in A with
// w' + a = k w.
Key2Solution key2_solve_M(const Key2Instance& inst);

// --- conductor search ---------------------------------------------------

// A representation of the enumerated finite quotient by invertible
// rational matrices, aligned with group.elements.
struct FiniteRep {
    FiniteLevelGroup group;
    std::vector<RatMat> matrices;
    int dim = 0;
};

// Index of the class of m in the enumerated quotient, -1 if absent.
long class_index(const FiniteLevelGroup& grp, const Mat& m);

// Left-regular representation of the enumerated quotient.
FiniteRep regular_rep(const FiniteLevelGroup& grp);

// pi(g) pi(h) = pi(gh) over at most max_pairs sampled pairs.
bool rep_multiplicative(const FiniteRep& rep, long max_pairs = 4000);

// Dimension of the subspace fixed by the image of J_1(L) in the quotient,
// computed as the kernel of the summed action minus the member count.
int fixed_space_dim(const DualPairContext& ctx, const FiniteRep& rep,
                    const Lattice& l);

// First entry of the decreasing chain whose J_1-fixed space is nonzero,
// every strictly larger tested entry having fixed space zero.
Lattice conductor(const DualPairContext& ctx, const FiniteRep& rep,
                  const std::vector<Lattice>& chain);

// --- finite indices -----------------------------------------------------

// [L1 : (w0(pi^{-r2}L2) + L1)^perp] = [(w0(pi^{-r1}L1) + L2) : L2]; the
// common exponent of p is written to *exponent when given.
bool index_sous_lemme_check(const DualPairContext& ctx, const TensorVector& w0,
                            long* exponent = nullptr);

// --- H2 against scalar lattices -----------------------------------------

struct MonotoneWitness {
    IsometryElement u;  // in H_2(pi^k L2) but not in H_2(N)
    Vec v, vdual;       // the pure unimodular pair behind the transform
    long s = 0;         // least s > 0 with pi^{k+s} v in N
    Vec mover;          // vector of N^perp that u - 1 pushes out of L2
    std::string json() const;
};

// For N a proper sublattice of M = pi^k L2, k >= 1 + e: an element
// separating H_2(N) from H_2(M), certified on both sides.
MonotoneWitness h2_strict_monotone_witness(const DualPairContext& ctx, long k,
                                           const Lattice& n);

// H_2(pi^k L2) acts on s_{w'} by the support character only when w' lies
// in B(pi^k L2); checks the implication on a finite probe of the group and
// returns whether it held (it always must).
bool h2_character_support(const DualPairContext& ctx, const Vec& wprime,
                          long k);

// --- double commutant ---------------------------------------------------

// A and B generate pointwise-commuting algebras of dim x dim rational
// matrices with Ae = Be: checks each algebra equals the centralizer of the
// other.
bool double_commutant_check(int dim, const std::vector<RatMat>& agens,
                            const std::vector<RatMat>& bgens,
                            const std::vector<Rat>& e);

// --- theta vanishing ----------------------------------------------------

// True when no w in B(L) attains w(pi^{-r2}L2) + L1 = L^perp because the
// residue ranks forbid it (the unimodular corank of L exceeds dim V2).
// The verdict is cross-checked by exhausting B(L)/A when the coset count
// stays within probe_cap, and by an explicit witness otherwise.
bool theta_vanishing_predicate(const DualPairContext& ctx, const Lattice& l,
                               long probe_cap = 4096);

}  // namespace weillat
