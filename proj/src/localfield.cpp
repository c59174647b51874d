#include "weillat/localfield.hpp"

#include <algorithm>
#include <sstream>

namespace weillat {

namespace {

/** a mod p^m for a p-integral rational a. */
Int rat_window(const Rat& q, long p, int m) {
    Int mod = int_pow(p, m);
    Int num = numerator(q), den = denominator(q);
    if (den % p == 0) throw std::domain_error("rat_window: not p-integral");
    return int_mod(num * inv_mod(den, mod), mod);
}

}  // namespace

std::shared_ptr<const FieldConfig> FieldConfig::make(long p, int K, int r, bool quadratic,
                                                     long mb, long mc) {
    if (!is_prime(p)) throw config_error("p must be prime");
    if (K < 1) throw config_error("precision must be positive");
    auto cfg = std::make_shared<FieldConfig>();
    cfg->p = p;
    cfg->K = K;
    cfg->r = r;
    cfg->quadratic = quadratic;
    cfg->mb = quadratic ? mb : 0;
    cfg->mc = quadratic ? mc : 0;
    cfg->e = (p == 2) ? 1 : 0;
    if (quadratic) {
        // x^2 + mb x + mc must have no root in the residue field.
        for (long x = 0; x < p; ++x)
            if ((x * x + mb * x + mc) % p == 0)
                throw config_error("minimal polynomial reducible mod p");
    }
    return cfg;
}

LocalFieldElement LocalFieldElement::zero(FieldConfigPtr cfg) {
    LocalFieldElement x;
    x.cfg_ = std::move(cfg);
    return x;
}

LocalFieldElement LocalFieldElement::from_window(FieldConfigPtr cfg, long lo, int nd, Int a, Int b) {
    if (nd < 1) throw std::domain_error("from_window: empty window");
    if (b != 0 && !cfg->quadratic) throw std::domain_error("from_window: omega part in a non-quadratic config");
    LocalFieldElement x;
    Int mod = int_pow(cfg->p, nd);
    x.cfg_ = std::move(cfg);
    x.zero_ = false;
    x.lo_ = lo;
    x.nd_ = nd;
    x.a_ = int_mod(a, mod);
    x.b_ = int_mod(b, mod);
    return x;
}

LocalFieldElement LocalFieldElement::from_int(FieldConfigPtr cfg, const Int& n) {
    return from_rational(std::move(cfg), Rat(n));
}

LocalFieldElement LocalFieldElement::from_rational(FieldConfigPtr cfg, const Rat& q) {
    return from_pair(std::move(cfg), q, 0);
}

LocalFieldElement LocalFieldElement::from_pair(FieldConfigPtr cfg, const Rat& qa, const Rat& qb) {
    if (qa == 0 && qb == 0) return zero(std::move(cfg));
    if (qb != 0 && !cfg->quadratic) throw std::domain_error("from_pair: omega part in a non-quadratic config");
    long p = cfg->p;
    long va = (qa == 0) ? VAL_INF : rat_val(qa, p);
    long vb = (qb == 0) ? VAL_INF : rat_val(qb, p);
    long lo = std::min(va, vb);
    int K = cfg->K;
    Rat pa = qa, pb = qb;
    Rat scale = (lo >= 0) ? Rat(1) / Rat(int_pow(p, lo)) : Rat(int_pow(p, -lo));
    pa *= scale;
    pb *= scale;
    return from_window(std::move(cfg), lo, K, rat_window(pa, p, K), rat_window(pb, p, K));
}

LocalFieldElement LocalFieldElement::pi_pow(FieldConfigPtr cfg, long m) {
    LocalFieldElement x = one(cfg);
    x.lo_ += m;
    return x;
}

void LocalFieldElement::check_same(const LocalFieldElement& o) const {
    if (!cfg_ || !o.cfg_ || cfg_->p != o.cfg_->p || cfg_->quadratic != o.cfg_->quadratic)
        throw std::domain_error("mixed field configs");
}

long LocalFieldElement::val() const {
    if (zero_) return VAL_INF;
    if (a_ == 0 && b_ == 0) throw precision_exhausted("valuation of an all-zero window");
    long p = cfg_->p;
    long s = VAL_INF;
    if (a_ != 0) s = std::min(s, int_val(a_, p));
    if (b_ != 0) s = std::min(s, int_val(b_, p));
    return lo_ + s;
}

LocalFieldElement LocalFieldElement::operator-() const {
    if (zero_) return *this;
    Int mod = int_pow(cfg_->p, nd_);
    LocalFieldElement x = *this;
    x.a_ = int_mod(-a_, mod);
    x.b_ = int_mod(-b_, mod);
    return x;
}

LocalFieldElement LocalFieldElement::operator+(const LocalFieldElement& o) const {
    check_same(o);
    if (zero_) return o;
    if (o.zero_) return *this;
    long p = cfg_->p;
    long lo = std::min(lo_, o.lo_);
    long top = std::min(lo_ + nd_, o.lo_ + o.nd_);
    int nd = static_cast<int>(top - lo);
    Int mod = int_pow(p, nd);
    Int sa = a_ * int_pow(p, lo_ - lo) + o.a_ * int_pow(p, o.lo_ - lo);
    Int sb = b_ * int_pow(p, lo_ - lo) + o.b_ * int_pow(p, o.lo_ - lo);
    LocalFieldElement x;
    x.cfg_ = cfg_;
    x.zero_ = false;
    x.lo_ = lo;
    x.nd_ = nd;
    x.a_ = int_mod(sa, mod);
    x.b_ = int_mod(sb, mod);
    return x;
}

LocalFieldElement LocalFieldElement::operator*(const LocalFieldElement& o) const {
    check_same(o);
    if (zero_ || o.zero_) return zero(cfg_);
    long p = cfg_->p;
    int nd = std::min(nd_, o.nd_);
    Int mod = int_pow(p, nd);
    // (a1 + b1 w)(a2 + b2 w) with w^2 = -mb w - mc.
    Int aa = a_ * o.a_ - Int(cfg_->mc) * b_ * o.b_;
    Int bb = a_ * o.b_ + b_ * o.a_ - Int(cfg_->mb) * b_ * o.b_;
    LocalFieldElement x;
    x.cfg_ = cfg_;
    x.zero_ = false;
    x.lo_ = lo_ + o.lo_;
    x.nd_ = nd;
    x.a_ = int_mod(aa, mod);
    x.b_ = int_mod(bb, mod);
    return x;
}

LocalFieldElement LocalFieldElement::conj() const {
    if (zero_ || !cfg_->quadratic) return *this;
    Int mod = int_pow(cfg_->p, nd_);
    LocalFieldElement x = *this;
    x.a_ = int_mod(a_ - Int(cfg_->mb) * b_, mod);
    x.b_ = int_mod(-b_, mod);
    return x;
}

LocalFieldElement LocalFieldElement::normalized() const {
    if (zero_ || (a_ == 0 && b_ == 0)) return *this;
    long p = cfg_->p;
    long s = val() - lo_;
    if (s == 0) return *this;
    Int sh = int_pow(p, s);
    LocalFieldElement x = *this;
    x.lo_ += s;
    x.nd_ -= static_cast<int>(s);
    x.a_ = a_ / sh;
    x.b_ = b_ / sh;
    return x;
}

LocalFieldElement LocalFieldElement::truncated(int nd) const {
    if (zero_ || nd >= nd_) return *this;
    if (nd < 1) throw std::domain_error("truncated: empty window");
    Int mod = int_pow(cfg_->p, nd);
    LocalFieldElement x = *this;
    x.nd_ = nd;
    x.a_ = int_mod(a_, mod);
    x.b_ = int_mod(b_, mod);
    return x;
}

LocalFieldElement LocalFieldElement::inv() const {
    if (zero_) throw std::domain_error("inv: exact zero");
    LocalFieldElement u = normalized();  // throws precision_exhausted on an all-zero window
    long p = cfg_->p;
    Int mod = int_pow(p, u.nd_);
    // Unit norm: (a + b w)(a - mb b - b w) = a^2 - mb a b + mc b^2.
    Int N = int_mod(u.a_ * u.a_ - Int(cfg_->mb) * u.a_ * u.b_ + Int(cfg_->mc) * u.b_ * u.b_, mod);
    if (N % p == 0) throw std::domain_error("inv: not a unit at its valuation");
    Int Ninv = inv_mod(N, mod);
    LocalFieldElement x;
    x.cfg_ = cfg_;
    x.zero_ = false;
    x.lo_ = -u.lo_;
    x.nd_ = u.nd_;
    x.a_ = int_mod((u.a_ - Int(cfg_->mb) * u.b_) * Ninv, mod);
    x.b_ = int_mod(-u.b_ * Ninv, mod);
    return x;
}

LocalFieldElement LocalFieldElement::shifted(long m) const {
    if (zero_) return *this;
    LocalFieldElement x = *this;
    x.lo_ += m;
    return x;
}

bool LocalFieldElement::ord_ge(long m) const {
    if (zero_) return true;
    if (lo_ >= m) return true;
    long upto = std::min(m, lo_ + nd_);
    Int mod = int_pow(cfg_->p, upto - lo_);
    if (int_mod(a_, mod) != 0 || int_mod(b_, mod) != 0) return false;
    if (lo_ + nd_ < m) throw precision_exhausted("ord_ge: window stops before " + std::to_string(m));
    return true;
}

Rat LocalFieldElement::frac_below(long m) const {
    auto [qa, qb] = frac_pair_below(m);
    if (qb != 0) throw std::domain_error("frac_below: omega part present");
    return qa;
}

std::pair<Rat, Rat> LocalFieldElement::frac_pair_below(long m) const {
    if (zero_) return {0, 0};
    if (lo_ >= m) return {0, 0};
    if (lo_ + nd_ < m) throw precision_exhausted("frac_below: window stops before " + std::to_string(m));
    long p = cfg_->p;
    Int mod = int_pow(p, m - lo_);
    Rat scale = (lo_ >= 0) ? Rat(int_pow(p, lo_)) : Rat(1) / Rat(int_pow(p, -lo_));
    return {Rat(int_mod(a_, mod)) * scale, Rat(int_mod(b_, mod)) * scale};
}

std::string LocalFieldElement::str() const {
    if (zero_) return "0";
    std::ostringstream os;
    os << "p^" << lo_ << "*(" << a_;
    if (cfg_->quadratic) os << "+" << b_ << "w";
    os << ") + O(p^" << (lo_ + nd_) << ")";
    return os.str();
}

UnityExponent::UnityExponent(long p_, Int num_, int den_pow_) : p(p_), num(std::move(num_)), den_pow(den_pow_) {
    Int mod = int_pow(p, den_pow);
    num = int_mod(num, mod);
    while (den_pow > 0 && num % p == 0) {
        num /= p;
        --den_pow;
    }
    if (num == 0) den_pow = 0;
}

UnityExponent UnityExponent::operator+(const UnityExponent& o) const {
    if (p != o.p) throw std::domain_error("UnityExponent: mixed p");
    int d = std::max(den_pow, o.den_pow);
    Int n = num * int_pow(p, d - den_pow) + o.num * int_pow(p, d - o.den_pow);
    return UnityExponent(p, n, d);
}

UnityExponent UnityExponent::operator-() const {
    return UnityExponent(p, -num, den_pow);
}

std::string UnityExponent::str() const {
    std::ostringstream os;
    os << num << "/" << p << "^" << den_pow;
    return os.str();
}

UnityExponent psi_eval(const LocalFieldElement& x) {
    const auto& cfg = *x.config();
    if (x.is_exact_zero()) return UnityExponent(cfg.p, 0, 0);
    // psi(x) depends on x through its class mod P^r.
    Rat f = x.frac_below(cfg.r);
    return psi_eval_rat(cfg, f);
}

UnityExponent psi_eval_rat(const FieldConfig& cfg, const Rat& x) {
    if (x == 0) return UnityExponent(cfg.p, 0, 0);
    // Exponent is the p-adic fractional part of p^-r x.
    long vx = rat_val(x, cfg.p);
    if (vx >= cfg.r) return UnityExponent(cfg.p, 0, 0);
    int d = static_cast<int>(cfg.r - vx);
    Int mod = int_pow(cfg.p, d);
    // x = u p^vx with u a p-unit written n0/d0.
    Rat u = x * ((vx >= 0) ? Rat(1) / Rat(int_pow(cfg.p, vx)) : Rat(int_pow(cfg.p, -vx)));
    Int n0 = numerator(u), d0 = denominator(u);
    return UnityExponent(cfg.p, int_mod(n0 * inv_mod(d0, mod), mod), d);
}

}  // namespace weillat
