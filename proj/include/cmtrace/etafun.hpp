#ifndef CMTRACE_ETAFUN_HPP
#define CMTRACE_ETAFUN_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "cmtrace/complexnum.hpp"
#include "cmtrace/funcdsl.hpp"
#include "cmtrace/qforms.hpp"
#include "cmtrace/rational.hpp"
#include "cmtrace/util.hpp"

namespace cmtrace::etafun {

struct PrecisionPolicy {
    long base_bits = 96;     // certified relative error target 2^-base_bits
    long guard_bits = 32;
    int max_doublings = 8;

    void check() const {
        if (base_bits < 64) throw std::domain_error("PrecisionPolicy: base_bits must be >= 64");
        if (max_doublings < 1) throw std::domain_error("PrecisionPolicy: max_doublings must be >= 1");
    }
};

struct UpperHalfPoint {
    Real x;
    Real y;
    std::optional<qforms::CMPoint> cm;  // exact provenance when known

    UpperHalfPoint(Real re, Real im, std::optional<qforms::CMPoint> prov = std::nullopt)
        : x(std::move(re)), y(std::move(im)), cm(std::move(prov)) {
        if (y.sgn() <= 0) throw std::domain_error("UpperHalfPoint: imaginary part must be positive");
    }

    Complex z() const { return {x, y}; }

    static UpperHalfPoint from_cm(const qforms::CMPoint& p, mpfr_prec_t prec) {
        Real x(Rat(static_cast<long>(-p.b), static_cast<long>(2 * p.a)), prec);
        Real y = sqrt(Real(static_cast<long>(p.D), prec)) / (2 * p.a);
        return UpperHalfPoint(std::move(x), std::move(y), p);
    }
};

struct EvalResult {
    Complex value;
    double abs_err = 0.0;       // certified absolute bound from the doubling pass
    mpfr_prec_t bits_used = 0;
};

// Exact Dedekind sum s(d, c) via the reciprocity law; cross-checked against
// the defining finite sum in the tests.
inline Rat dedekind_sum(long long d, long long c) {
    if (c <= 0) throw std::domain_error("dedekind_sum: c must be positive");
    Int dc = Int(static_cast<long>(d % c));
    Int cc = Int(static_cast<long>(c));
    if (dc < 0) dc += cc;
    {
        Int g;
        mpz_gcd(g.get_mpz_t(), dc.get_mpz_t(), cc.get_mpz_t());
        if (cc != 1 && g != 1) throw std::domain_error("dedekind_sum: gcd(c,d) must be 1");
    }
    Rat acc(0);
    int sign = 1;
    // descend as in the Euclidean algorithm:
    // s(d,c) = -1/4 + (c^2 + d^2 + 1)/(12cd) - s(c mod d, d)
    while (true) {
        if (cc == 1 || dc == 0) break;
        Rat num(cc * cc + dc * dc + 1);
        Rat den(Int(12) * cc * dc);
        acc += Rat(sign) * (Rat(num) / den - rat(1, 4));
        Int next = cc % dc;
        cc = dc;
        dc = next;
        sign = -sign;
    }
    return acc;
}

namespace detail {

inline Complex apply_mobius(const qforms::GroupElement& g, const Complex& z) {
    mpfr_prec_t p = z.prec();
    Complex num = {z.re * static_cast<long>(g.a) + Real(static_cast<long>(g.b), p),
                   z.im * static_cast<long>(g.a)};
    Complex den = {z.re * static_cast<long>(g.c) + Real(static_cast<long>(g.d), p),
                   z.im * static_cast<long>(g.c)};
    return num / den;
}

// SL2(Z) reduction of z to |Re| <= 1/2 + eps, |z| >= 1 - eps, eps ~ 2^-bits/2.
inline std::pair<Complex, qforms::GroupElement> reduce_point(Complex z, mpfr_prec_t bits) {
    using qforms::GroupElement;
    if (z.im.sgn() <= 0) throw std::domain_error("reduce_point: not in the upper half plane");
    if (std::abs(z.re.to_double()) > 1e12)
        throw std::domain_error("reduce_point: real part too large");
    Real eps(64);
    mpfr_set_ui_2exp(eps.raw(), 1, -static_cast<long>(bits / 2), MPFR_RNDN);
    Real one(1L, z.prec());
    GroupElement g = GroupElement::identity();
    long max_iter = static_cast<long>(bits) + 128;
    const long long entry_limit = 1LL << 40;
    for (long it = 0; it < max_iter; ++it) {
        if (std::abs(g.a) > entry_limit || std::abs(g.b) > entry_limit ||
            std::abs(g.c) > entry_limit || std::abs(g.d) > entry_limit)
            throw std::domain_error("reduce_point: transform entries out of range");
        Real half(Rat(1, 2), z.prec());
        long n = (z.re + half).to_long_floor();
        if (n != 0) {
            z.re -= Real(n, z.prec());
            g = GroupElement::T(-n) * g;
        }
        if (abs2(z) < one - eps) {
            z = -(Complex(1L, z.prec()) / z);
            g = GroupElement::S() * g;
        } else {
            return {z, g};
        }
    }
    throw precision_error("reduce_point: did not settle near the fundamental domain boundary",
                          eps.to_double());
}

// Pentagonal-number series for eta at a point of the fundamental domain.
inline Complex eta_in_fd(const Complex& z, mpfr_prec_t bits) {
    Complex w24 = cis2pi(Complex{z.re / 24, z.im / 24});
    double y = z.im.to_double();
    double decay = 2.0 * 3.14159265358979 * y / 24.0;  // -log|w24|
    double need = (static_cast<double>(bits) + 16.0) * 0.6931471805599453;
    long kmax = static_cast<long>(std::sqrt(need / (36.0 * decay))) + 2;
    Complex acc(bits);
    for (long k = -kmax; k <= kmax; ++k) {
        long e = (6 * k + 1) * (6 * k + 1);
        Complex term = cpow_si(w24, e);
        if (k % 2 == 0)
            acc += term;
        else
            acc += -term;
    }
    return acc;
}

// eta at an arbitrary point, via reduction and the exact multiplier system
// eta(g z) = exp(pi i ((a+d)/12c - s(d,c))) sqrt(-i (cz+d)) eta(z) for c > 0.
inline Complex eta_at(const Complex& z, mpfr_prec_t bits) {
    auto [zr, g] = reduce_point(z, bits);
    Complex val = eta_in_fd(zr, bits);
    if (g.is_identity()) return val;
    if (g.c == 0) {
        long long a = g.a, b = g.b;
        if (a == -1) { a = 1; b = -b; }
        // eta(z + b) = e^{pi i b / 12} eta(z)
        return val / cis_pi_rat(Rat(static_cast<long>(b), 12L), bits);
    }
    long long a = g.a, b = g.b, c = g.c, d = g.d;
    if (c < 0) { a = -a; b = -b; c = -c; d = -d; }
    Rat phase = Rat(static_cast<long>(a + d), static_cast<long>(12 * c)) - dedekind_sum(d, c);
    Complex eps = cis_pi_rat(phase, bits);
    Complex czd = {z.re * static_cast<long>(c) + Real(static_cast<long>(d), bits),
                   z.im * static_cast<long>(c)};
    Complex root = csqrt(Complex{czd.im, -czd.re});  // -i(cz+d)
    return val / (eps * root);
}

inline long sigma_terms_needed(double y, mpfr_prec_t bits) {
    double need = (static_cast<double>(bits) + 16.0) * 0.6931471805599453;
    return static_cast<long>(need / (2.0 * 3.14159265358979 * y)) + 4;
}

inline Complex j_at(const Complex& z, mpfr_prec_t bits) {
    auto [zr, g] = reduce_point(z, bits);
    Complex q = cis2pi(zr);
    long n_max = sigma_terms_needed(zr.im.to_double(), bits);
    auto sig3 = cmtrace::detail::divisor_power_sums(n_max + 1, 3);
    Complex e4(1L, bits);
    Complex qn(1L, bits);
    for (long n = 1; n <= n_max; ++n) {
        qn *= q;
        e4 += qn * Real(Rat(240) * Rat(sig3[n]), bits);
    }
    Complex disc = cpow_si(eta_in_fd(zr, bits), 24);
    return cpow_si(e4, 3) / disc;
}

// Adaptive doubling: evaluate at increasing precision until two successive
// results agree to the policy target.
inline EvalResult certify(const std::function<Complex(mpfr_prec_t)>& fn,
                          const PrecisionPolicy& policy, long floor_bits,
                          const char* what) {
    policy.check();
    long bits = std::max(policy.base_bits + policy.guard_bits, floor_bits);
    Complex prev = fn(bits);
    double err = 0, scale = 1;
    for (int k = 0; k < policy.max_doublings; ++k) {
        bits *= 2;
        Complex cur = fn(bits);
        err = abs(cur - prev).to_double();
        scale = std::max(1.0, abs(cur).to_double());
        double target = std::max(std::ldexp(scale, -static_cast<int>(std::min(policy.base_bits, 900L))),
                                 1e-290);
        if (err <= target) {
            double floor_err = std::max(std::ldexp(scale, -static_cast<int>(std::min(bits / 2, static_cast<long>(900)))), 1e-290);
            return {cur, std::max(err, floor_err), bits};
        }
        prev = cur;
    }
    throw precision_error(std::string(what) + ": precision exhausted", err);
}

}  // namespace detail

inline std::pair<UpperHalfPoint, qforms::GroupElement> reduce_to_fd(const UpperHalfPoint& z,
                                                                    const PrecisionPolicy& policy) {
    policy.check();
    mpfr_prec_t bits = policy.base_bits + policy.guard_bits;
    Complex zz = {Real(0.0, bits) + z.x, Real(0.0, bits) + z.y};
    auto [zr, g] = detail::reduce_point(zz, bits);
    return {UpperHalfPoint(zr.re, zr.im), g};
}

namespace detail {

// Working-precision copy of the point. Exact CM provenance is re-expanded at
// the requested precision so the adaptive doubling sees a sharper input, not
// a stale rounding of it.
inline Complex point_at(const UpperHalfPoint& z, mpfr_prec_t bits) {
    if (z.cm) {
        auto p = UpperHalfPoint::from_cm(*z.cm, bits);
        return p.z();
    }
    return {Real(0.0, bits) + z.x, Real(0.0, bits) + z.y};
}

}  // namespace detail

inline EvalResult eta(const UpperHalfPoint& z, const PrecisionPolicy& policy) {
    return detail::certify([&](mpfr_prec_t b) {
        return detail::eta_at(detail::point_at(z, b), b);
    }, policy, 0, "eta");
}

// Working-precision floor for CM evaluations: |q^{-1}| ~ e^{pi sqrt(D)}.
inline long cm_floor_bits_for_disc(long long D) {
    return static_cast<long>(std::ceil(3.14159265358979 * std::sqrt(static_cast<double>(D)) /
                                       0.6931471805599453)) + 64;
}

inline long cm_floor_bits(const UpperHalfPoint& z) {
    return z.cm ? cm_floor_bits_for_disc(z.cm->D) : 0;
}

inline EvalResult j_invariant(const UpperHalfPoint& z, const PrecisionPolicy& policy) {
    return detail::certify([&](mpfr_prec_t b) {
        return detail::j_at(detail::point_at(z, b), b);
    }, policy, cm_floor_bits(z), "j_invariant");
}

// Value of a parsed weight-0 function at z, with a certified error bound.
inline EvalResult eval_function(const funcdsl::FunctionSpec& spec, const UpperHalfPoint& z,
                                const PrecisionPolicy& policy) {
    using funcdsl::Term;
    auto eval_at = [&](mpfr_prec_t b) {
        Complex zz = detail::point_at(z, b);
        Complex total(b);
        std::optional<Complex> jcache;
        for (const auto& t : spec.terms) {
            Complex term(b);
            switch (t.kind) {
                case Term::Kind::Constant:
                    term = Complex(1L, b);
                    break;
                case Term::Kind::BuiltinJ:
                case Term::Kind::BuiltinLittleJ: {
                    if (!jcache) jcache = detail::j_at(zz, b);
                    term = *jcache;
                    if (t.kind == Term::Kind::BuiltinJ) term = term - Complex(744L, b);
                    break;
                }
                case Term::Kind::EtaMonomial: {
                    term = Complex(1L, b);
                    for (const auto& f : t.monomial) {
                        Complex zd = {zz.re * f.delta, zz.im * f.delta};
                        term *= cpow_si(detail::eta_at(zd, b), f.exponent);
                    }
                    break;
                }
            }
            total += term * Real(t.coef, b);
        }
        return total;
    };
    return detail::certify(eval_at, policy, cm_floor_bits(z), "eval_function");
}

}  // namespace cmtrace::etafun

#endif
