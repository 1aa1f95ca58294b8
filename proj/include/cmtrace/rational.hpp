#ifndef CMTRACE_RATIONAL_HPP
#define CMTRACE_RATIONAL_HPP

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace cmtrace {

// Exact rational arithmetic is delegated to GMP throughout.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Rat rat_pow(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    Rat b = base;
    bool neg = e < 0;
    unsigned long ue = neg ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    Rat out;
    mpz_pow_ui(out.get_num_mpz_t(), b.get_num_mpz_t(), ue);
    mpz_pow_ui(out.get_den_mpz_t(), b.get_den_mpz_t(), ue);
    out.canonicalize();
    if (neg) {
        if (out == 0) throw std::domain_error("rat_pow: zero to negative power");
        out = 1 / out;
    }
    return out;
}

inline bool rat_is_integer(const Rat& r) { return r.get_den() == 1; }

inline std::string rat_str(const Rat& r) { return r.get_str(); }

// Parses "a" or "a/b"; returns nullopt on malformed input.
inline std::optional<Rat> rat_parse(const std::string& s) {
    if (s.empty()) return std::nullopt;
    Rat r;
    if (mpq_set_str(r.get_mpq_t(), s.c_str(), 10) != 0) return std::nullopt;
    if (mpz_sgn(mpq_denref(r.get_mpq_t())) == 0) return std::nullopt;
    r.canonicalize();
    if (r.get_den() < 0) return std::nullopt;
    return r;
}

inline long rat_to_long(const Rat& r) {
    if (!rat_is_integer(r)) throw std::domain_error("rat_to_long: not an integer");
    if (!r.get_num().fits_slong_p()) throw std::domain_error("rat_to_long: out of range");
    return r.get_num().get_si();
}

// sigma_1 with the conventions used for weight-3/2 constant terms:
// sigma1(0) = -1/24, sigma1(n) = sum of divisors for positive integers,
// and 0 for anything that is not a non-negative integer.
inline Rat sigma1(const Rat& x) {
    if (!rat_is_integer(x)) return Rat(0);
    if (x < 0) return Rat(0);
    if (x == 0) return rat(-1, 24);
    long n = rat_to_long(x);
    long long s = 0;
    for (long d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            s += d;
            if (d != n / d) s += n / d;
        }
    }
    return Rat(static_cast<long>(s));
}

}  // namespace cmtrace

#endif
