#pragma once

#include <stdexcept>
#include <string>

namespace weillat {

/** A congruence or valuation could not be certified inside the digit window. */
struct precision_exhausted : std::runtime_error {
    explicit precision_exhausted(const std::string& what) : std::runtime_error("precision exhausted: " + what) {}
};

/** Requested catalog variant violates its parity or existence constraints. */
struct bad_variant : std::domain_error {
    explicit bad_variant(const std::string& what) : std::domain_error("bad variant: " + what) {}
};

struct no_split_data : std::domain_error {
    explicit no_split_data(const std::string& what) : std::domain_error("no split data: " + what) {}
};

struct not_self_dual : std::domain_error {
    explicit not_self_dual(const std::string& what) : std::domain_error("not self-dual: " + what) {}
};

struct dependent_reductions : std::domain_error {
    explicit dependent_reductions(const std::string& what) : std::domain_error("dependent reductions: " + what) {}
};

struct not_sublattice : std::domain_error {
    explicit not_sublattice(const std::string& what) : std::domain_error("not a sublattice: " + what) {}
};

struct precondition_violated : std::domain_error {
    explicit precondition_violated(const std::string& what) : std::domain_error("precondition violated: " + what) {}
};

/** Cayley series does not converge for the given pair. */
struct not_convergent : std::domain_error {
    explicit not_convergent(const std::string& what) : std::domain_error("not convergent: " + what) {}
};

struct group_too_large : std::runtime_error {
    explicit group_too_large(const std::string& what) : std::runtime_error("group too large: " + what) {}
};

struct probe_insufficient : std::runtime_error {
    explicit probe_insufficient(const std::string& what) : std::runtime_error("probe insufficient: " + what) {}
};

struct rank_deficient : std::domain_error {
    explicit rank_deficient(const std::string& what) : std::domain_error("rank deficient: " + what) {}
};

/** An identity the solver is entitled to rely on failed; indicates a bug, not bad input. */
struct certificate_failure : std::logic_error {
    explicit certificate_failure(const std::string& what) : std::logic_error("certificate failure: " + what) {}
};

struct witness_failure : std::logic_error {
    explicit witness_failure(const std::string& what) : std::logic_error("witness failure: " + what) {}
};

struct no_extension : std::logic_error {
    explicit no_extension(const std::string& what) : std::logic_error("no extension: " + what) {}
};

struct chain_exhausted : std::runtime_error {
    explicit chain_exhausted(const std::string& what) : std::runtime_error("chain exhausted: " + what) {}
};

struct illegal_polarization : std::domain_error {
    explicit illegal_polarization(const std::string& what) : std::domain_error("illegal polarization: " + what) {}
};

struct not_implemented_for_kind : std::domain_error {
    explicit not_implemented_for_kind(const std::string& what) : std::domain_error("not implemented for kind: " + what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error("config error: " + what) {}
};

}  // namespace weillat
