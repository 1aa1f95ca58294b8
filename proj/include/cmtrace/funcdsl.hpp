#ifndef CMTRACE_FUNCDSL_HPP
#define CMTRACE_FUNCDSL_HPP

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "cmtrace/laurent.hpp"
#include "cmtrace/rational.hpp"
#include "cmtrace/util.hpp"

namespace cmtrace::funcdsl {

struct EtaFactor {
    long delta = 1;
    long exponent = 0;
};

struct Term {
    enum class Kind { Constant, BuiltinJ, BuiltinLittleJ, EtaMonomial };
    Kind kind = Kind::Constant;
    Rat coef = Rat(0);
    std::vector<EtaFactor> monomial;  // sorted by delta, nonzero exponents
};

// A weight-0 input function: a rational linear combination of eta-quotient
// monomials in eta(delta z) with delta | level, or the builtin j / J = j - 744,
// or a constant.
struct FunctionSpec {
    long level = 1;
    std::vector<Term> terms;

    bool is_constant() const {
        return terms.empty() ||
               (terms.size() == 1 && terms[0].kind == Term::Kind::Constant);
    }
    Rat constant_value() const { return terms.empty() ? Rat(0) : terms[0].coef; }

    bool has_builtin() const {
        for (const auto& t : terms)
            if (t.kind == Term::Kind::BuiltinJ || t.kind == Term::Kind::BuiltinLittleJ) return true;
        return false;
    }

    std::string canonical_text() const {
        if (terms.empty()) return "0";
        std::string out;
        for (const auto& t : terms) {
            if (!out.empty()) out += " + ";
            out += rat_str(t.coef);
            switch (t.kind) {
                case Term::Kind::Constant:
                    break;
                case Term::Kind::BuiltinJ:
                    out += "*J";
                    break;
                case Term::Kind::BuiltinLittleJ:
                    out += "*j";
                    break;
                case Term::Kind::EtaMonomial:
                    for (const auto& f : t.monomial)
                        out += "*eta(" + std::to_string(f.delta) + ")^" + std::to_string(f.exponent);
                    break;
            }
        }
        return out;
    }
};

namespace detail {

inline bool monomial_less(const Term& x, const Term& y) {
    if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind);
    return std::lexicographical_compare(
        x.monomial.begin(), x.monomial.end(), y.monomial.begin(), y.monomial.end(),
        [](const EtaFactor& a, const EtaFactor& b) {
            return a.delta != b.delta ? a.delta < b.delta : a.exponent < b.exponent;
        });
}

inline bool monomial_equal(const Term& x, const Term& y) {
    if (x.kind != y.kind || x.monomial.size() != y.monomial.size()) return false;
    for (std::size_t i = 0; i < x.monomial.size(); ++i)
        if (x.monomial[i].delta != y.monomial[i].delta ||
            x.monomial[i].exponent != y.monomial[i].exponent)
            return false;
    return true;
}

}  // namespace detail

// Merge duplicate monomials, drop zero coefficients and exponents, sort terms.
inline void normalize(FunctionSpec& spec) {
    for (auto& t : spec.terms) {
        if (t.kind != Term::Kind::EtaMonomial) continue;
        std::sort(t.monomial.begin(), t.monomial.end(),
                  [](const EtaFactor& a, const EtaFactor& b) { return a.delta < b.delta; });
        std::vector<EtaFactor> merged;
        for (const auto& f : t.monomial) {
            if (!merged.empty() && merged.back().delta == f.delta)
                merged.back().exponent += f.exponent;
            else
                merged.push_back(f);
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const EtaFactor& f) { return f.exponent == 0; }),
                     merged.end());
        t.monomial = std::move(merged);
        if (t.monomial.empty()) t.kind = Term::Kind::Constant;
    }
    std::sort(spec.terms.begin(), spec.terms.end(), detail::monomial_less);
    std::vector<Term> out;
    for (auto& t : spec.terms) {
        if (!out.empty() && detail::monomial_equal(out.back(), t))
            out.back().coef += t.coef;
        else
            out.push_back(std::move(t));
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coef == 0; }),
              out.end());
    spec.terms = std::move(out);
}

inline void validate(const FunctionSpec& spec) {
    if (spec.level < 1) throw std::domain_error("function spec: invalid level");
    for (const auto& t : spec.terms) {
        if (t.kind == Term::Kind::BuiltinJ || t.kind == Term::Kind::BuiltinLittleJ) {
            if (spec.level != 1)
                throw std::domain_error("builtin j/J is only available at level 1");
        }
        if (t.kind != Term::Kind::EtaMonomial) continue;
        long weight = 0;
        for (const auto& f : t.monomial) {
            if (f.delta < 1 || spec.level % f.delta != 0)
                throw std::domain_error("eta argument " + std::to_string(f.delta) +
                                        " does not divide the level " + std::to_string(spec.level));
            weight += f.exponent;
        }
        if (weight != 0)
            throw std::domain_error("eta monomial has weight " + rat_str(Rat(weight) / 2) +
                                    "; only weight-0 inputs are allowed");
    }
}

namespace detail {

class Parser {
public:
    Parser(const std::string& text, long level) : s_(text), level_(level) {}

    FunctionSpec run() {
        FunctionSpec spec;
        spec.level = level_;
        skip_ws();
        int sign = read_sign();
        spec.terms.push_back(term(sign));
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size()) break;
            char c = s_[pos_];
            if (c == '+' || c == '-') {
                ++pos_;
                spec.terms.push_back(term(c == '-' ? -1 : 1));
            } else {
                throw parse_error(std::string("unexpected character '") + c + "'", pos_);
            }
        }
        normalize(spec);
        validate(spec);
        return spec;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    int read_sign() {
        skip_ws();
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-'))
            return s_[pos_++] == '-' ? -1 : 1;
        return 1;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) throw parse_error(std::string("expected '") + c + "'", pos_);
    }

    long integer(bool allow_sign) {
        skip_ws();
        std::size_t start = pos_;
        bool neg = false;
        if (allow_sign && pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            neg = s_[pos_] == '-';
            ++pos_;
            skip_ws();
        }
        std::size_t dstart = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == dstart) throw parse_error("expected an integer", start);
        long v = 0;
        for (std::size_t i = dstart; i < pos_; ++i) {
            if (v > 100000000L) throw parse_error("integer literal too large", start);
            v = v * 10 + (s_[i] - '0');
        }
        return neg ? -v : v;
    }

    Rat rational() {
        long num = integer(false);
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '/') {
            ++pos_;
            long den = integer(false);
            if (den == 0) throw parse_error("zero denominator", pos_);
            return rat(num, den);
        }
        return Rat(num);
    }

    Term term(int sign) {
        Term t;
        t.coef = Rat(sign);
        bool have_builtin = false;
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size()) throw parse_error("expected a factor", pos_);
            char c = s_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                t.coef *= rational();
            } else if (c == 'J' || c == 'j') {
                if (have_builtin || !t.monomial.empty())
                    throw parse_error("builtin j/J cannot be multiplied by other factors", pos_);
                ++pos_;
                t.kind = (c == 'J') ? Term::Kind::BuiltinJ : Term::Kind::BuiltinLittleJ;
                have_builtin = true;
            } else if (s_.compare(pos_, 3, "eta") == 0) {
                if (have_builtin)
                    throw parse_error("builtin j/J cannot be multiplied by other factors", pos_);
                pos_ += 3;
                expect('(');
                long delta = integer(false);
                expect(')');
                expect('^');
                long e = integer(true);
                t.monomial.push_back({delta, e});
                t.kind = Term::Kind::EtaMonomial;
            } else {
                throw parse_error(std::string("unexpected character '") + c + "'", pos_);
            }
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == '*') {
                ++pos_;
                continue;
            }
            break;
        }
        return t;
    }

    const std::string& s_;
    long level_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// Parses the expression grammar
//   expr    := term (("+" | "-") term)* ;
//   term    := [rational "*"] factor ("*" factor)* ;
//   factor  := "eta(" int ")" "^" int | "j" | "J" | rational ;
// against the given level. Errors carry the offending position.
inline FunctionSpec parse(const std::string& text, long level = 1) {
    return detail::Parser(text, level).run();
}

// f |_{W_p}: eta(delta z) -> eta((p/delta) z) with the exact rational power of
// p that the inversion law produces for weight-0 quotients. Constants and the
// level-1 builtins are fixed.
inline FunctionSpec fricke_action(const FunctionSpec& spec) {
    long p = spec.level;
    FunctionSpec out;
    out.level = p;
    for (const auto& t : spec.terms) {
        Term nt = t;
        if (t.kind == Term::Kind::EtaMonomial && p > 1) {
            nt.monomial.clear();
            long sqrtp_multiplicity = 0;  // power of sqrt(p) collected from the inversion law
            for (const auto& f : t.monomial) {
                long q = p / f.delta;  // p/delta, again a divisor of p
                nt.monomial.push_back({q, f.exponent});
                // each factor eta(delta (-1/(pz)))^e contributes (p/delta)^{e/2}
                if (q == p) sqrtp_multiplicity += f.exponent;
            }
            if (sqrtp_multiplicity % 2 != 0)
                throw std::domain_error(
                    "fricke_action: odd multiplicity of sqrt(p); quotient is not "
                    "level-" + std::to_string(p) + " modular");
            nt.coef = t.coef * rat_pow(Rat(static_cast<long>(p)), sqrtp_multiplicity / 2);
        }
        out.terms.push_back(std::move(nt));
    }
    normalize(out);
    validate(out);
    return out;
}

// +1 / -1 when the spec is a Fricke eigenfunction, nullopt otherwise.
// Everything is +1 at level 1 where W_1 already lies in SL2(Z).
inline std::optional<int> fricke_eigenvalue(const FunctionSpec& spec) {
    if (spec.level == 1) return 1;
    FunctionSpec g = fricke_action(spec);
    if (g.canonical_text() == spec.canonical_text()) return 1;
    for (auto& t : g.terms) t.coef = -t.coef;
    if (g.canonical_text() == spec.canonical_text()) return -1;
    return std::nullopt;
}

namespace detail {

// Expansion of a single eta monomial prod eta(delta z)^{e} as an exact series
// on the q^{1/den} lattice, valid below lattice order `trunc`.
inline LaurentSeries eta_monomial_series(const std::vector<EtaFactor>& mono, long den, long trunc) {
    long offset = 0;  // total exponent shift sum(delta*e)/24 in lattice units
    for (const auto& f : mono) offset += f.delta * f.exponent * (den / 24);
    long unit_trunc = trunc - offset;
    if (unit_trunc <= 0) unit_trunc = 1;
    LaurentSeries prod = LaurentSeries::one(den, unit_trunc);
    for (const auto& f : mono) {
        long step = f.delta * den;
        long n_terms = unit_trunc / step + 2;
        LaurentSeries e = euler_product(n_terms, den, step);
        prod = prod * e.pow(f.exponent);
    }
    return prod.shift_lattice(offset);
}

inline LaurentSeries expansion_on_lattice(const FunctionSpec& spec, long order, long den) {
    if (den % 24 != 0) throw std::domain_error("expansion lattice must be divisible by 24");
    long trunc = order * den;
    LaurentSeries out(den, trunc);
    for (const auto& t : spec.terms) {
        LaurentSeries s(1, 1);
        switch (t.kind) {
            case Term::Kind::Constant:
                s = LaurentSeries::constant(Rat(1), den, trunc);
                break;
            case Term::Kind::BuiltinJ:
            case Term::Kind::BuiltinLittleJ: {
                LaurentSeries j = j_series(order + 1);
                if (t.kind == Term::Kind::BuiltinJ)
                    j = j - LaurentSeries::constant(Rat(744), 1, j.trunc());
                s = j.rebase(den);
                break;
            }
            case Term::Kind::EtaMonomial:
                s = eta_monomial_series(t.monomial, den, trunc);
                break;
        }
        LaurentSeries scaled = s;
        scaled *= t.coef;
        out = out + scaled;
    }
    return out;
}

struct ExpansionCache {
    std::shared_mutex mutex;
    std::map<std::string, std::shared_ptr<const LaurentSeries>> entries;

    static ExpansionCache& instance() {
        static ExpansionCache c;
        return c;
    }
};

inline std::shared_ptr<const LaurentSeries> cached(const std::string& key,
                                                   const std::function<LaurentSeries()>& make) {
    auto& cache = ExpansionCache::instance();
    {
        std::shared_lock lock(cache.mutex);
        auto it = cache.entries.find(key);
        if (it != cache.entries.end()) return it->second;
    }
    auto value = std::make_shared<const LaurentSeries>(make());
    std::unique_lock lock(cache.mutex);
    auto [it, inserted] = cache.entries.emplace(key, value);
    return it->second;
}

}  // namespace detail

// Exact expansion at the cusp infinity: coefficients a(n) for all exponents
// n < order, on the level lattice q^{1/(24 level)}.
inline LaurentSeries q_expansion_infinity(const FunctionSpec& spec, long order) {
    if (order < 1) throw std::domain_error("q_expansion_infinity: order must be >= 1");
    std::string key = "inf|" + std::to_string(spec.level) + "|" + std::to_string(order) + "|" +
                      spec.canonical_text();
    auto s = detail::cached(
        key, [&] { return detail::expansion_on_lattice(spec, order, 24 * spec.level); });
    return *s;
}

// Exact expansion of f(sigma_0 z) = f(-1/z) at the cusp 0, indexed by
// exponents in (1/level) Z: obtained from (f|W_p)(z/p).
inline LaurentSeries q_expansion_zero(const FunctionSpec& spec, long order) {
    if (order < 1) throw std::domain_error("q_expansion_zero: order must be >= 1");
    std::string key = "zero|" + std::to_string(spec.level) + "|" + std::to_string(order) + "|" +
                      spec.canonical_text();
    auto s = detail::cached(key, [&] {
        FunctionSpec g = fricke_action(spec);
        LaurentSeries ginf = detail::expansion_on_lattice(g, order * spec.level, 24);
        return ginf.stretch_den(spec.level);
    });
    return *s;
}

struct CuspExpansionPair {
    LaurentSeries at_infinity;
    LaurentSeries at_zero;
};

inline CuspExpansionPair cusp_expansions(const FunctionSpec& spec, long order) {
    return {q_expansion_infinity(spec, order), q_expansion_zero(spec, order)};
}

inline std::vector<std::pair<Rat, Rat>> principal_part(const LaurentSeries& s) {
    return s.principal_part();
}

}  // namespace cmtrace::funcdsl

#endif
