#ifndef CMTRACE_COMPLEXNUM_HPP
#define CMTRACE_COMPLEXNUM_HPP

#include <utility>

#include "cmtrace/real.hpp"

namespace cmtrace {

// Complex numbers over Real. std::complex is only specified for the builtin
// floating types, so the handful of operations we need live here.
struct Complex {
    Real re;
    Real im;

    explicit Complex(mpfr_prec_t prec = 64) : re(prec), im(prec) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    Complex(long r, mpfr_prec_t prec) : re(r, prec), im(0L, prec) {}

    mpfr_prec_t prec() const { return std::max(re.prec(), im.prec()); }

    friend Complex operator+(const Complex& a, const Complex& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend Complex operator-(const Complex& a, const Complex& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
    friend Complex operator/(const Complex& a, const Complex& b) {
        Real n = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    Complex& operator+=(const Complex& b) {
        re += b.re;
        im += b.im;
        return *this;
    }
    Complex& operator*=(const Complex& b) { return *this = *this * b; }
};

inline Real abs2(const Complex& z) { return z.re * z.re + z.im * z.im; }
inline Real abs(const Complex& z) { return sqrt(abs2(z)); }

inline Complex conj(const Complex& z) { return {z.re, -z.im}; }

// Principal branch (nonnegative real part; positive imaginary part on the cut).
inline Complex csqrt(const Complex& z) {
    mpfr_prec_t p = z.prec();
    Real r = abs(z);
    Real two(2L, p);
    Real u = sqrt((r + z.re) / two);
    Real v = sqrt((r - z.re) / two);
    if (z.im.sgn() < 0) v = -v;
    return {u, v};
}

inline Complex cpow_si(const Complex& z, long e) {
    if (e == 0) return Complex(1L, z.prec());
    bool neg = e < 0;
    unsigned long ue = neg ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    Complex base = z;
    Complex out(1L, z.prec());
    while (ue) {
        if (ue & 1) out *= base;
        base *= base;
        ue >>= 1;
    }
    if (neg) out = Complex(1L, z.prec()) / out;
    return out;
}

// e(z) = exp(2 pi i z), the standard q-variable map.
inline Complex cis2pi(const Complex& z) {
    mpfr_prec_t p = z.prec();
    Real twopi = real_pi(p) * 2L;
    Real mag = exp(-(twopi * z.im));
    Real s(p), c(p);
    sin_cos(twopi * z.re, s, c);
    return {mag * c, mag * s};
}

// exp(pi i r) for exact rational r; reduces r mod 2 first so large
// multiplier exponents lose no accuracy.
inline Complex cis_pi_rat(const Rat& r, mpfr_prec_t prec) {
    Rat m = r;
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), m.get_num_mpz_t(), m.get_den_mpz_t());
    // reduce into [0,2)
    Rat whole(q % 2 == 0 ? q : q - 1);
    m -= whole;
    Real angle = real_pi(prec) * Real(m, prec);
    Real s(prec), c(prec);
    sin_cos(angle, s, c);
    return {c, s};
}

}  // namespace cmtrace

#endif
