#include "weillat/cyclotomic.hpp"

#include <sstream>

namespace weillat {

long CyclotomicScalar::phi() const {
    if (level_ == 0) return 1;
    long r = p_ - 1;
    for (int i = 1; i < level_; ++i) r *= p_;
    return r;
}

void CyclotomicScalar::accumulate(std::vector<Rat>& c, long p, int level, const Int& e_in, const Rat& q) {
    if (q == 0) return;
    Int e = int_mod(e_in, int_pow(p, level));
    long phi = static_cast<long>(c.size());
    if (e < phi) {
        c[static_cast<long>(e)] += q;
        return;
    }
    // zeta^((p-1) p^(level-1) + s) = -(zeta^s + zeta^(p^(level-1)+s) + ...).
    Int block = (level == 0) ? Int(1) : int_pow(p, level - 1);
    Int s = e - Int(phi);
    for (long j = 0; j + 1 < p; ++j)
        c[static_cast<long>(Int(j) * block + s)] -= q;
}

CyclotomicScalar CyclotomicScalar::root_of_unity(long p, int level, const Int& power) {
    CyclotomicScalar x = zero(p);
    x.level_ = level;
    long phi = (level == 0) ? 1 : [&] { long r = p - 1; for (int i = 1; i < level; ++i) r *= p; return r; }();
    x.c_.assign(phi, Rat(0));
    accumulate(x.c_, p, level, power, Rat(1));
    return x;
}

CyclotomicScalar CyclotomicScalar::at_level(int level) const {
    if (level == level_) return *this;
    if (level < level_) throw std::domain_error("CyclotomicScalar: cannot lower level");
    CyclotomicScalar x = zero(p_);
    x.level_ = level;
    long phi = p_ - 1;
    for (int i = 1; i < level; ++i) phi *= p_;
    x.c_.assign(phi, Rat(0));
    // zeta_{p^k} = zeta_{p^level}^(p^(level-k)).
    Int stretch = int_pow(p_, level - level_);
    for (long i = 0; i < static_cast<long>(c_.size()); ++i)
        accumulate(x.c_, p_, level, Int(i) * stretch, c_[i]);
    return x;
}

CyclotomicScalar CyclotomicScalar::operator+(const CyclotomicScalar& o) const {
    if (p_ != o.p_) throw std::domain_error("CyclotomicScalar: mixed primes");
    int lv = std::max(level_, o.level_);
    CyclotomicScalar a = at_level(lv), b = o.at_level(lv);
    for (size_t i = 0; i < a.c_.size(); ++i) a.c_[i] += b.c_[i];
    return a;
}

CyclotomicScalar CyclotomicScalar::operator-(const CyclotomicScalar& o) const {
    return *this + (-o);
}

CyclotomicScalar CyclotomicScalar::operator-() const {
    CyclotomicScalar x = *this;
    for (auto& q : x.c_) q = -q;
    return x;
}

CyclotomicScalar CyclotomicScalar::operator*(const CyclotomicScalar& o) const {
    if (p_ != o.p_) throw std::domain_error("CyclotomicScalar: mixed primes");
    int lv = std::max(level_, o.level_);
    CyclotomicScalar a = at_level(lv), b = o.at_level(lv);
    CyclotomicScalar x = zero(p_);
    x.level_ = lv;
    x.c_.assign(a.c_.size(), Rat(0));
    for (long i = 0; i < static_cast<long>(a.c_.size()); ++i) {
        if (a.c_[i] == 0) continue;
        for (long j = 0; j < static_cast<long>(b.c_.size()); ++j) {
            if (b.c_[j] == 0) continue;
            accumulate(x.c_, p_, lv, Int(i) + Int(j), a.c_[i] * b.c_[j]);
        }
    }
    return x;
}

CyclotomicScalar CyclotomicScalar::scaled(const Rat& q) const {
    CyclotomicScalar x = *this;
    for (auto& v : x.c_) v *= q;
    return x;
}

CyclotomicScalar CyclotomicScalar::conj() const {
    CyclotomicScalar x = zero(p_);
    x.level_ = level_;
    x.c_.assign(c_.size(), Rat(0));
    Int order = int_pow(p_, level_);
    for (long i = 0; i < static_cast<long>(c_.size()); ++i)
        accumulate(x.c_, p_, level_, order - i, c_[i]);
    return x;
}

bool CyclotomicScalar::is_zero() const {
    for (const auto& q : c_)
        if (q != 0) return false;
    return true;
}

bool CyclotomicScalar::rational_value(Rat* out) const {
    for (size_t i = 1; i < c_.size(); ++i)
        if (c_[i] != 0) return false;
    if (out) *out = c_.empty() ? Rat(0) : c_[0];
    return true;
}

std::string CyclotomicScalar::str() const {
    std::ostringstream os;
    os << "cyc(p=" << p_ << ", level=" << level_ << ";";
    bool first = true;
    for (size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        os << (first ? " " : " + ") << c_[i] << "*z^" << i;
        first = false;
    }
    if (first) os << " 0";
    os << ")";
    return os.str();
}

}  // namespace weillat
