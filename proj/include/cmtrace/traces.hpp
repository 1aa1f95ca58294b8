#ifndef CMTRACE_TRACES_HPP
#define CMTRACE_TRACES_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmtrace/etafun.hpp"
#include "cmtrace/funcdsl.hpp"
#include "cmtrace/laurent.hpp"
#include "cmtrace/qforms.hpp"
#include "cmtrace/rational.hpp"
#include "cmtrace/util.hpp"

namespace cmtrace::traces {

using etafun::PrecisionPolicy;
using funcdsl::FunctionSpec;
using cmtrace::sigma1;

enum class Normalization { G, I0 };

inline std::string normalization_name(Normalization n) { return n == Normalization::G ? "G" : "I0"; }

// Cusp invariants of Gamma_0(p): width alpha, lattice constant beta and
// epsilon = alpha/beta. At level 1 the two cusps collapse to a single class.
struct CuspData {
    enum class Label { Infinity, Zero };
    Label label = Label::Infinity;
    Rat alpha = Rat(1);
    Rat beta = Rat(2);
    Rat epsilon = Rat(1, 2);
};

inline std::vector<CuspData> cusps(long p) {
    std::vector<CuspData> out;
    out.push_back({CuspData::Label::Infinity, Rat(1), Rat(2), rat(1, 2)});
    if (p > 1)
        out.push_back({CuspData::Label::Zero, Rat(static_cast<long>(p)),
                       Rat(static_cast<long>(2 * p)), rat(1, 2)});
    return out;
}

struct NumericValue {
    Real value;
    double abs_err = 0.0;
    mpfr_prec_t bits = 0;
};

struct TraceRecord {
    enum class Kind { Positive, Zero, Negative };
    Rat index;
    Kind kind = Kind::Zero;
    std::optional<Rat> value_exact;
    std::optional<NumericValue> value_numeric;
    std::optional<Rat> rounded;

    bool is_zero(double tol = 1e-12) const {
        if (value_exact) return *value_exact == 0;
        if (value_numeric) return std::abs(value_numeric->value.to_double()) <= tol;
        return true;
    }
};

// One non-holomorphic Fourier term, stored symbolically so it can be
// evaluated at arbitrary v. The records mirror the two-sided presentation
// sum_{N in Z} beta(4 pi N^2 v) q^{-N^2}: a BetaTerm record with index -m^2 is
// the contribution of a single N = +-m, so the full q^{-m^2} coefficient of
// the lift is twice the record's value; the constant record (N = 0) carries
// its full value.
struct NonHoloTerm {
    enum class Kind { InverseSqrtV, BetaTerm };
    Kind kind = Kind::InverseSqrtV;
    Rat index = Rat(0);           // 0 or -m^2 (d = 1)
    Rat scalar;                   // rational multiple of 1/pi, see value()
    Rat beta_argument_coef;       // beta argument is coef * pi * v; 4m^2 for index -m^2

    // scalar/(pi sqrt(v)) (* beta(4 pi m^2 v) for BetaTerm records)
    Real value(const Real& v, mpfr_prec_t bits) const;
};

// beta(s) = int_1^inf t^{-3/2} e^{-st} dt via the closed identity
// beta(s) = 2 (e^{-s} - sqrt(pi s) erfc(sqrt(s))).
inline Real beta_function(const Real& s) {
    if (s.sgn() < 0) throw std::domain_error("beta_function: s must be >= 0");
    mpfr_prec_t bits = std::max<mpfr_prec_t>(s.prec(), 64) + 32;
    if (s.is_zero()) return Real(2L, bits);
    Real ss(0L, bits);
    ss += s;
    Real pi = real_pi(bits);
    Real r = exp(-ss) - sqrt(pi * ss) * erfc(sqrt(ss));
    return r * 2L;
}

inline Real NonHoloTerm::value(const Real& v, mpfr_prec_t bits) const {
    if (v.sgn() <= 0) throw std::domain_error("NonHoloTerm::value: v must be positive");
    Real vv(0L, bits);
    vv += v;
    Real pi = real_pi(bits);
    Real out = Real(scalar, bits) / (pi * sqrt(vv));
    if (kind == Kind::BetaTerm) out = out * beta_function(Real(beta_argument_coef, bits) * pi * vv);
    return out;
}

namespace detail {

// Default expansion order: enough to cover the constant coefficient and the
// full principal part at both cusps, with slack for the sigma_1 sums.
inline long default_order(long extra = 0) { return 2 + extra; }

struct Expansions {
    LaurentSeries inf;
    LaurentSeries zero;
    long pole_bound;  // largest n with a(-n) != 0 or b(-n/p) != 0

    Rat a(long n) const { return inf.coeff(Rat(n)); }             // e(nz) coefficient
    Rat b(const Rat& x) const { return zero.coeff(x); }           // e(xz), x in (1/p)Z
};

inline Expansions expansions_for(const FunctionSpec& spec, long p, long order) {
    Expansions e{funcdsl::q_expansion_infinity(spec, order), funcdsl::q_expansion_zero(spec, order),
                 0};
    if (!e.inf.covers(Rat(0)) || !e.zero.covers(Rat(0)))
        throw std::domain_error("insufficient expansion order for constant coefficients");
    long bound = 0;
    if (!e.inf.is_zero()) bound = std::max(bound, static_cast<long>(-(e.inf.valuation()) / e.inf.den()) + 1);
    if (!e.zero.is_zero())
        bound = std::max(bound, static_cast<long>(p) * (-(e.zero.valuation()) / e.zero.den() + 1));
    e.pole_bound = std::max(bound, 1L);
    return e;
}

}  // namespace detail

// Positive-index modular trace. Normalization G sums f(alpha_Q)/|stab| over
// Gamma_0^*(p)-classes (the Fricke-extension traces t*_f); normalization I0 sums
// 2 f(alpha_Q)/|stab| over Gamma_0(p)-classes (the h = 0 theta-lift
// coefficient). The empty class set gives an exact zero.
inline TraceRecord trace_positive(const FunctionSpec& spec, long p, long D,
                                  const PrecisionPolicy& policy,
                                  Normalization norm = Normalization::G) {
    if (D <= 0) throw std::domain_error("trace_positive: D must be positive");
    if (norm == Normalization::G && p > 1 && !spec.is_constant()) {
        // a Gamma_0^*(p)-trace only makes sense for Fricke-plus inputs
        auto eig = funcdsl::fricke_eigenvalue(spec);
        if (!eig || *eig != 1)
            throw std::domain_error("trace_positive: the G normalization needs a Fricke-plus input");
    }
    TraceRecord rec;
    rec.index = Rat(D);
    rec.kind = TraceRecord::Kind::Positive;

    auto reps = qforms::class_reps_p(D, p, norm == Normalization::G);
    if (reps.empty()) {
        rec.value_exact = Rat(0);
        rec.value_numeric = NumericValue{Real(0L, 64), 0.0, 64};
        rec.rounded = Rat(0);
        return rec;
    }

    if (spec.is_constant()) {
        Rat total(0);
        for (const auto& r : reps) {
            if (norm == Normalization::G)
                total += spec.constant_value() / r.weight_denominator();
            else
                total += Rat(2) * spec.constant_value() / r.stabilizer_order;
        }
        rec.value_exact = total;
        rec.rounded = total;
        mpfr_prec_t b = policy.base_bits + policy.guard_bits;
        rec.value_numeric = NumericValue{Real(total, b), 0.0, b};
        return rec;
    }

    mpfr_prec_t bits = 64;
    Real re_sum(0L, 64), im_sum(0L, 64);
    double err = 0.0;
    for (const auto& r : reps) {
        long bits0 = std::max<long>(policy.base_bits + policy.guard_bits,
                                    etafun::cm_floor_bits_for_disc(D));
        auto z = etafun::UpperHalfPoint::from_cm(qforms::cm_point(r.form), bits0 + 16);
        etafun::EvalResult v = etafun::eval_function(spec, z, policy);
        Rat w = norm == Normalization::G ? Rat(1) / r.weight_denominator()
                                         : Rat(2) / r.stabilizer_order;
        bits = std::max<mpfr_prec_t>(bits, v.bits_used);
        re_sum = re_sum + v.value.re * Real(w, v.bits_used);
        im_sum = im_sum + v.value.im * Real(w, v.bits_used);
        err += std::abs(w.get_d()) * v.abs_err;
    }
    // classes come in conjugate pairs, the trace is real
    if (std::abs(im_sum.to_double()) > 4 * err + 1e-18)
        throw std::logic_error("trace_positive: non-real trace beyond the error bound");
    NumericValue nv{re_sum, err, bits};
    rec.value_numeric = nv;
    // stabilizer orders divide 12 after Fricke doubling
    Real twelve = re_sum * 12L;
    rec.rounded = Rat(round_to_int(twelve)) / 12;
    return rec;
}

// Zero-index trace, exact. For I0 the two-cusp form is
// 2 sum (a(-n) + b(-n/p)) (sigma_1(n) + p sigma_1(n/p)); at level 1 the single
// cusp gives 4 sum a(-n) sigma_1(n). For G it is the folded constant sum
// (sigma_1(n) + p sigma_1(n/p)) a(-n).
inline TraceRecord trace_zero(const FunctionSpec& spec, long p,
                              Normalization norm = Normalization::I0, long order = 0) {
    auto e = detail::expansions_for(spec, p, order > 0 ? order : detail::default_order());
    Rat total(0);
    for (long n = 0; n <= e.pole_bound; ++n) {
        Rat w = sigma1(Rat(n)) + Rat(static_cast<long>(p)) * sigma1(Rat(n) / static_cast<long>(p));
        if (norm == Normalization::G) {
            total += w * e.a(-n);
        } else if (p == 1) {
            total += Rat(4) * e.a(-n) * sigma1(Rat(n));
        } else {
            total += Rat(2) * (e.a(-n) + e.b(Rat(-n) / static_cast<long>(p))) * w;
        }
    }
    TraceRecord rec;
    rec.index = Rat(0);
    rec.kind = TraceRecord::Kind::Zero;
    rec.value_exact = total;
    return rec;
}

// Negative-index trace t_f(0, -m^2), exact. The I0 route follows the
// cusp-by-cusp count nu_ell = 2 m epsilon_ell with vanishing real-part
// offsets; the folded G form is -m sum_k a(-mk).
inline TraceRecord trace_negative(const FunctionSpec& spec, long p, long m,
                                  Normalization norm = Normalization::I0, long order = 0) {
    if (m <= 0) throw std::domain_error("trace_negative: m must be positive");
    auto e = detail::expansions_for(spec, p, order > 0 ? order : detail::default_order());
    Rat total(0);
    long kmax = e.pole_bound / m + 1;
    if (norm == Normalization::G) {
        for (long k = 1; k <= kmax; ++k) total += e.a(-m * k);
        total *= Rat(static_cast<long>(-m));
    } else {
        for (const auto& cusp : cusps(p)) {
            Rat nu = Rat(static_cast<long>(2 * m)) * cusp.epsilon;  // = m at these levels
            Rat step = Rat(static_cast<long>(2 * m)) / cusp.beta;   // exponent stride at the cusp
            Rat inner(0);
            for (long k = 1; k <= kmax * static_cast<long>(p); ++k) {
                Rat expnt = -step * k;
                Rat c = cusp.label == CuspData::Label::Infinity ? e.inf.coeff(expnt)
                                                                : e.zero.coeff(expnt);
                inner += c;
            }
            // both h and -h contribute (h = 0): factor 2
            total += Rat(-2) * nu * inner;
        }
    }
    TraceRecord rec;
    rec.index = Rat(static_cast<long>(-m)) * m;
    rec.kind = TraceRecord::Kind::Negative;
    rec.value_exact = total;
    return rec;
}

// Symbolic non-holomorphic terms, present only when a constant coefficient
// survives at some cusp. m_max bounds the materialized BetaTerm records.
inline std::vector<NonHoloTerm> nonholo_terms(const FunctionSpec& spec, long p,
                                              Normalization norm = Normalization::I0,
                                              long m_max = 3, long order = 0) {
    auto e = detail::expansions_for(spec, p, order > 0 ? order : detail::default_order());
    Rat eps_sum(0);  // sum over cusp classes of a_ell(0) * epsilon_ell
    for (const auto& cusp : cusps(p)) {
        Rat a0 = cusp.label == CuspData::Label::Infinity ? e.a(0) : e.b(Rat(0));
        eps_sum += a0 * cusp.epsilon;
    }
    std::vector<NonHoloTerm> out;
    if (eps_sum == 0) return out;
    Rat scale = norm == Normalization::I0 ? Rat(1) : (p == 1 ? rat(1, 2) : rat(1, 4));

    NonHoloTerm constant;
    constant.kind = NonHoloTerm::Kind::InverseSqrtV;
    constant.index = Rat(0);
    constant.scalar = scale * eps_sum / 2;  // value = scalar/(pi sqrt(v))
    constant.beta_argument_coef = Rat(0);
    out.push_back(constant);

    for (long m = 1; m <= m_max; ++m) {
        NonHoloTerm t;
        t.kind = NonHoloTerm::Kind::BetaTerm;
        t.index = Rat(static_cast<long>(-m)) * m;
        t.scalar = scale * eps_sum / 4;  // per single N = +-m of the two-sided sum
        t.beta_argument_coef = Rat(static_cast<long>(4 * m)) * m;
        out.push_back(t);
    }
    return out;
}

// Regularized average of f over the modular curve:
// integral^reg f dmu = -8 pi sum_ell alpha_ell sum_{n>=0} a_ell(-n) sigma_1(n).
// Returns the exact rational r with integral = r * pi, and the zero trace
// t_f(0,0) = -r/2 it induces.
struct RegularizedAverage {
    Rat pi_multiple;
    Rat zero_trace;
};

inline RegularizedAverage regularized_average(const FunctionSpec& spec, long p, long order = 0) {
    auto e = detail::expansions_for(spec, p, order > 0 ? order : detail::default_order());
    Rat sum(0);
    for (const auto& cusp : cusps(p)) {
        Rat inner(0);
        for (long n = 0; n <= e.pole_bound; ++n) {
            Rat c = cusp.label == CuspData::Label::Infinity ? e.a(-n) : e.b(Rat(-n));
            inner += c * sigma1(Rat(n));
        }
        sum += cusp.alpha * inner;
    }
    Rat r = Rat(-8) * sum;
    return {r, -r / 2};
}

struct PlusSpaceViolation {
    long index;
    std::string reason;
};

struct PlusSpaceReport {
    std::vector<PlusSpaceViolation> violations;
    bool pass() const { return violations.empty(); }
};

struct GeneratingSeries {
    long level = 1;
    std::string spec_text;
    Normalization normalization = Normalization::G;
    long dmax = 0;
    std::map<long, TraceRecord> table;  // index -> coefficient record
    std::vector<NonHoloTerm> nonholo;
    PlusSpaceReport plus_report;
};

// Kohnen plus-space support test: nonzero coefficients may only sit at
// indices n with -n a square modulo 4p. Numeric entries are judged by their
// rounded rational; an uncertified rounding is itself flagged.
inline PlusSpaceReport plus_space_check(const GeneratingSeries& series, double tol = 1e-6) {
    PlusSpaceReport report;
    long modulus = 4 * series.level;
    std::vector<bool> square(modulus, false);
    for (long x = 0; x < modulus; ++x) square[(x * x) % modulus] = true;
    for (const auto& [n, rec] : series.table) {
        long residue = ((-n) % modulus + modulus) % modulus;
        bool admissible = square[residue];
        if (rec.value_exact) {
            if (*rec.value_exact != 0 && !admissible)
                report.violations.push_back({n, "exact nonzero coefficient at inadmissible index"});
            continue;
        }
        if (!rec.value_numeric) continue;
        Rat rounded = rec.rounded.value_or(Rat(0));
        double delta = std::abs(
            (rec.value_numeric->value - Real(rounded, rec.value_numeric->value.prec())).to_double());
        if (delta > tol) {
            report.violations.push_back({n, "rounding not certified within tolerance"});
            continue;
        }
        if (rounded != 0 && !admissible)
            report.violations.push_back({n, "nonzero coefficient at inadmissible index"});
    }
    return report;
}

// Full assembly of the weight-3/2 generating series over indices
// -floor(sqrt(Dmax))^2 .. Dmax.
inline GeneratingSeries generating_series(const FunctionSpec& spec, long p, long Dmax,
                                          Normalization norm, const PrecisionPolicy& policy,
                                          unsigned jobs = 1) {
    if (Dmax < 1) throw std::domain_error("generating_series: Dmax must be >= 1");
    if (norm == Normalization::G && p > 1) {
        auto eig = funcdsl::fricke_eigenvalue(spec);
        if (!eig || *eig != 1)
            throw std::domain_error(
                "generating_series: the G normalization needs a Fricke-plus input");
    }
    long order = Dmax + 2;  // keeps every sigma_1 sum exact
    GeneratingSeries out;
    out.level = p;
    out.spec_text = spec.canonical_text();
    out.normalization = norm;
    out.dmax = Dmax;

    long msqrt = 0;
    while ((msqrt + 1) * (msqrt + 1) <= Dmax) ++msqrt;
    for (long m = 1; m <= msqrt; ++m) {
        TraceRecord rec = trace_negative(spec, p, m, norm, order);
        out.table[-m * m] = rec;
    }
    out.table[0] = trace_zero(spec, p, norm, order);

    std::vector<TraceRecord> positive(Dmax);
    parallel_for(static_cast<std::size_t>(Dmax), jobs, [&](std::size_t i) {
        positive[i] = trace_positive(spec, p, static_cast<long>(i) + 1, policy, norm);
    });
    for (long n = 1; n <= Dmax; ++n) out.table[n] = positive[n - 1];

    out.nonholo = nonholo_terms(spec, p, norm, msqrt, order);
    out.plus_report = plus_space_check(out);
    return out;
}

}  // namespace cmtrace::traces

#endif
