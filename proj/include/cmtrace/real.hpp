#ifndef CMTRACE_REAL_HPP
#define CMTRACE_REAL_HPP

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include "cmtrace/rational.hpp"

namespace cmtrace {

// Value-semantic wrapper around mpfr_t. Every value carries its own working
// precision; binary operations round to the larger of the two precisions.
// Rounding mode is always round-to-nearest.
class Real {
public:
    explicit Real(mpfr_prec_t prec = 64) { mpfr_init2(x_, std::max<mpfr_prec_t>(prec, MPFR_PREC_MIN)); mpfr_set_zero(x_, 1); }

    Real(long v, mpfr_prec_t prec) : Real(prec) { mpfr_set_si(x_, v, MPFR_RNDN); }
    Real(double v, mpfr_prec_t prec) : Real(prec) { mpfr_set_d(x_, v, MPFR_RNDN); }
    Real(const Rat& v, mpfr_prec_t prec) : Real(prec) { mpfr_set_q(x_, v.get_mpq_t(), MPFR_RNDN); }
    Real(const Int& v, mpfr_prec_t prec) : Real(prec) { mpfr_set_z(x_, v.get_mpz_t(), MPFR_RNDN); }

    Real(const Real& o) { mpfr_init2(x_, mpfr_get_prec(o.x_)); mpfr_set(x_, o.x_, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(x_, MPFR_PREC_MIN); mpfr_swap(x_, o.x_); }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(x_, mpfr_get_prec(o.x_));
            mpfr_set(x_, o.x_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(x_, o.x_);
        return *this;
    }
    ~Real() { mpfr_clear(x_); }

    mpfr_prec_t prec() const { return mpfr_get_prec(x_); }
    const mpfr_t& raw() const { return x_; }
    mpfr_t& raw() { return x_; }

    bool is_zero() const { return mpfr_zero_p(x_) != 0; }
    int sgn() const { return mpfr_sgn(x_); }
    double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }

    long to_long_floor() const {
        mpfr_t t;
        mpfr_init2(t, prec());
        mpfr_floor(t, x_);
        long out = mpfr_get_si(t, MPFR_RNDN);
        mpfr_clear(t);
        return out;
    }

    // Decimal string with the given number of significant digits.
    std::string str(std::size_t digits = 30) const {
        char* s = nullptr;
        mpfr_asprintf(&s, "%.*Rg", static_cast<int>(digits), x_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

    friend Real operator-(const Real& a) {
        Real r(a.prec());
        mpfr_neg(r.x_, a.x_, MPFR_RNDN);
        return r;
    }
    friend Real operator+(const Real& a, const Real& b) { return bin(a, b, mpfr_add); }
    friend Real operator-(const Real& a, const Real& b) { return bin(a, b, mpfr_sub); }
    friend Real operator*(const Real& a, const Real& b) { return bin(a, b, mpfr_mul); }
    friend Real operator/(const Real& a, const Real& b) { return bin(a, b, mpfr_div); }
    Real& operator+=(const Real& b) { mpfr_add(x_, x_, b.x_, MPFR_RNDN); return *this; }
    Real& operator-=(const Real& b) { mpfr_sub(x_, x_, b.x_, MPFR_RNDN); return *this; }
    Real& operator*=(const Real& b) { mpfr_mul(x_, x_, b.x_, MPFR_RNDN); return *this; }
    Real& operator/=(const Real& b) { mpfr_div(x_, x_, b.x_, MPFR_RNDN); return *this; }

    friend Real operator*(const Real& a, long b) {
        Real r(a.prec());
        mpfr_mul_si(r.x_, a.x_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator/(const Real& a, long b) {
        Real r(a.prec());
        mpfr_div_si(r.x_, a.x_, b, MPFR_RNDN);
        return r;
    }

    friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) < 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) > 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) <= 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) >= 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) == 0; }

private:
    using mpfr_binop = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
    static Real bin(const Real& a, const Real& b, mpfr_binop op) {
        Real r(std::max(a.prec(), b.prec()));
        op(r.x_, a.x_, b.x_, MPFR_RNDN);
        return r;
    }

    mpfr_t x_;
};

inline Real real_pi(mpfr_prec_t prec) {
    Real r(prec);
    mpfr_const_pi(r.raw(), MPFR_RNDN);
    return r;
}

inline Real abs(const Real& a) {
    Real r(a.prec());
    mpfr_abs(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

inline Real sqrt(const Real& a) {
    if (a.sgn() < 0) throw std::domain_error("sqrt of negative Real");
    Real r(a.prec());
    mpfr_sqrt(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

inline Real exp(const Real& a) {
    Real r(a.prec());
    mpfr_exp(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

inline Real log(const Real& a) {
    if (a.sgn() <= 0) throw std::domain_error("log of non-positive Real");
    Real r(a.prec());
    mpfr_log(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

inline Real erfc(const Real& a) {
    Real r(a.prec());
    mpfr_erfc(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

inline void sin_cos(const Real& a, Real& s, Real& c) {
    Real ss(a.prec()), cc(a.prec());
    mpfr_sin_cos(ss.raw(), cc.raw(), a.raw(), MPFR_RNDN);
    s = std::move(ss);
    c = std::move(cc);
}

inline Real pow_si(const Real& a, long e) {
    Real r(a.prec());
    mpfr_pow_si(r.raw(), a.raw(), e, MPFR_RNDN);
    return r;
}

inline Real round_nearest(const Real& a) {
    Real r(a.prec());
    mpfr_round(r.raw(), a.raw());
    return r;
}

// Nearest integer as an exact mpz, used when freezing numeric traces.
inline Int round_to_int(const Real& a) {
    Real r = round_nearest(a);
    Int z;
    mpfr_get_z(z.get_mpz_t(), r.raw(), MPFR_RNDN);
    return z;
}

}  // namespace cmtrace

#endif
