#ifndef CMTRACE_CLASSNUM_HPP
#define CMTRACE_CLASSNUM_HPP

#include <map>
#include <stdexcept>

#include "cmtrace/qforms.hpp"
#include "cmtrace/rational.hpp"
#include "cmtrace/real.hpp"
#include "cmtrace/traces.hpp"

namespace cmtrace::classnum {

// Hurwitz-Kronecker class number H(D): stabilizer-weighted count of the
// SL2(Z)-classes of forms of discriminant -D, with H(0) = -1/12 and
// H(D) = 0 for D = 1, 2 mod 4.
inline Rat hurwitz(long D) {
    if (D < 0) throw std::domain_error("hurwitz: D must be >= 0");
    if (D == 0) return rat(-1, 12);
    Rat h(0);
    for (const auto& rep : qforms::class_reps(D)) h += Rat(1) / rep.stabilizer_order;
    return h;
}

struct HurwitzTable {
    long max_index = 0;
    std::map<long, Rat> values;  // D -> H(D), admissible D only

    Rat at(long D) const {
        auto it = values.find(D);
        return it == values.end() ? Rat(0) : it->second;
    }
};

inline HurwitzTable hurwitz_table(long Dmax) {
    HurwitzTable t;
    t.max_index = Dmax;
    t.values[0] = rat(-1, 12);
    for (long D = 3; D <= Dmax; ++D) {
        long r = D % 4;
        if (r == 1 || r == 2) continue;
        t.values[D] = hurwitz(D);
    }
    return t;
}

// Holomorphic part of Zagier's weight-3/2 Eisenstein series: D -> H(D).
inline std::map<long, Rat> zagier_holomorphic_part(long Dmax) {
    if (Dmax < 0) throw std::domain_error("zagier_holomorphic_part: Dmax must be >= 0");
    return hurwitz_table(Dmax).values;
}

// The scalar (1/(16 pi sqrt(v))) beta(4 pi N^2 v) multiplying q^{-N^2} in the
// non-holomorphic part, for a single N of the two-sided sum.
inline Real zagier_nonholo_value(long N, const Real& v) {
    if (v.sgn() <= 0) throw std::domain_error("zagier_nonholo_value: v must be positive");
    mpfr_prec_t bits = std::max<mpfr_prec_t>(v.prec(), 64) + 32;
    Real vv(0L, bits);
    vv += v;
    Real pi = real_pi(bits);
    Real arg = pi * vv * static_cast<long>(4 * N * N);
    return traces::beta_function(arg) / (pi * sqrt(vv) * 16L);
}

}  // namespace cmtrace::classnum

#endif
