#include <random>

#include "cmtrace/etafun.hpp"
#include "cmtrace/funcdsl.hpp"
#include "doctest.h"

using namespace cmtrace;
using namespace cmtrace::funcdsl;

namespace {

LaurentSeries random_series(std::mt19937& rng, long den = 24) {
    std::uniform_int_distribution<long> expd(-3, 18);
    std::uniform_int_distribution<long> numd(-9, 9);
    std::uniform_int_distribution<long> dend(1, 4);
    LaurentSeries s(den, 20 * den);
    for (int i = 0; i < 10; ++i) {
        long e = expd(rng) * den + expd(rng);
        if (e >= s.trunc()) continue;
        s.set_lattice(e, rat(numd(rng), dend(rng)));
    }
    return s;
}

bool series_equal(const LaurentSeries& a, const LaurentSeries& b) {
    if (a.den() != b.den()) return false;
    long t = std::min(a.trunc(), b.trunc());
    for (const auto& [k, v] : a.coeffs())
        if (k < t && b.coeff_lattice(k) != v) return false;
    for (const auto& [k, v] : b.coeffs())
        if (k < t && a.coeff_lattice(k) != v) return false;
    return true;
}

}  // namespace

TEST_CASE("parse: builtins, constants and level validation") {
    auto j = parse("J", 1);
    REQUIRE(j.terms.size() == 1);
    CHECK(j.terms[0].kind == Term::Kind::BuiltinJ);
    CHECK(j.terms[0].coef == 1);
    CHECK(j.level == 1);

    auto c = parse("7/3", 5);
    CHECK(c.is_constant());
    CHECK(c.constant_value() == rat(7, 3));

    auto two_terms = parse("eta(1)^24 * eta(2)^-24 - 4096 * eta(2)^24 * eta(1)^-24", 2);
    CHECK(two_terms.terms.size() == 2);

    CHECK_THROWS_AS(parse("J", 2), std::domain_error);
    CHECK_THROWS_AS(parse("eta(3)^12 * eta(1)^-12", 2), std::domain_error);
}

TEST_CASE("parse: weight constraint and syntax errors") {
    CHECK_THROWS_AS(parse("eta(1)^23", 1), std::domain_error);
    CHECK_THROWS_AS(parse("eta(1)^24", 1), std::domain_error);
    CHECK_THROWS_WITH_AS(parse("eta(1)^", 1), doctest::Contains("position"), parse_error);
    CHECK_THROWS_AS(parse("eta(1^2", 1), parse_error);
    CHECK_THROWS_AS(parse("2 +", 1), parse_error);
    CHECK_THROWS_AS(parse("q + 1", 1), parse_error);
    CHECK_THROWS_AS(parse("1/0", 1), parse_error);
}

TEST_CASE("parse: normalization merges monomials and drops zeros") {
    auto s = parse("eta(1)^12 * eta(1)^12 * eta(2)^-24 + 1 - 1", 2);
    REQUIRE(s.terms.size() == 1);
    CHECK(s.terms[0].kind == Term::Kind::EtaMonomial);
    REQUIRE(s.terms[0].monomial.size() == 2);
    CHECK(s.terms[0].monomial[0].delta == 1);
    CHECK(s.terms[0].monomial[0].exponent == 24);

    auto z = parse("eta(1)^24*eta(2)^-24 - eta(1)^24*eta(2)^-24", 2);
    CHECK(z.terms.empty());
    CHECK(z.canonical_text() == "0");
}

TEST_CASE("q_expansion_infinity of J: q^-1 + 0 + 196884 q") {
    auto s = q_expansion_infinity(parse("J", 1), 2);
    CHECK(s.den() == 24);
    CHECK(s.coeff(Rat(-1)) == 1);
    CHECK(s.coeff(Rat(0)) == 0);
    CHECK(s.coeff(Rat(1)) == 196884);
    auto sj = q_expansion_infinity(parse("j", 1), 3);
    CHECK(sj.coeff(Rat(0)) == 744);
    CHECK(sj.coeff(Rat(2)) == 21493760);
}

TEST_CASE("internal eta-power engine: eta^24 = q - 24q^2 + 252q^3 - 1472q^4 + ...") {
    auto s = funcdsl::detail::eta_monomial_series({{1, 24}}, 24, 6 * 24);
    CHECK(s.coeff(Rat(1)) == 1);
    CHECK(s.coeff(Rat(2)) == -24);
    CHECK(s.coeff(Rat(3)) == 252);
    CHECK(s.coeff(Rat(4)) == -1472);
    CHECK(s.coeff(Rat(1, 2)) == 0);
}

TEST_CASE("q_expansion_infinity of the level-2 hauptmodul") {
    auto spec = parse("eta(1)^24 * eta(2)^-24", 2);
    auto s = q_expansion_infinity(spec, 4);
    CHECK(s.den() == 48);
    CHECK(s.coeff(Rat(-1)) == 1);
    CHECK(s.coeff(Rat(0)) == -24);
    CHECK(s.coeff(Rat(1)) == 276);
    CHECK(s.coeff(Rat(2)) == -2048);
    CHECK(s.coeff(Rat(3)) == 11202);
    CHECK(s.coeff(Rat(1, 2)) == 0);
    auto pp = s.principal_part();
    REQUIRE(pp.size() == 1);
    CHECK(pp[0].first == -1);
    CHECK(pp[0].second == 1);
}

TEST_CASE("fricke_action on the hauptmodul and involution property") {
    auto spec = parse("eta(1)^24 * eta(2)^-24", 2);
    auto w = fricke_action(spec);
    CHECK(w.canonical_text() == parse("4096 * eta(2)^24 * eta(1)^-24", 2).canonical_text());
    auto ww = fricke_action(w);
    CHECK(ww.canonical_text() == spec.canonical_text());

    auto c = parse("9/2", 3);
    CHECK(fricke_action(c).canonical_text() == c.canonical_text());

    auto jlevel1 = parse("J", 1);
    CHECK(fricke_action(jlevel1).canonical_text() == jlevel1.canonical_text());
}

TEST_CASE("fricke_action rejects odd sqrt(p) multiplicity") {
    auto odd = parse("eta(1)^1 * eta(2)^-1", 2);
    CHECK_THROWS_AS(fricke_action(odd), std::domain_error);
}

TEST_CASE("fricke_eigenvalue detects the eigenspaces") {
    CHECK(fricke_eigenvalue(parse("J", 1)) == 1);
    CHECK(fricke_eigenvalue(parse("eta(1)^24*eta(2)^-24 + 4096*eta(2)^24*eta(1)^-24", 2)) == 1);
    CHECK(fricke_eigenvalue(parse("eta(1)^24*eta(2)^-24 - 4096*eta(2)^24*eta(1)^-24", 2)) == -1);
    CHECK(!fricke_eigenvalue(parse("eta(1)^24*eta(2)^-24", 2)).has_value());
    CHECK(fricke_eigenvalue(parse("10", 5)) == 1);
}

TEST_CASE("q_expansion_zero: level 1 equals the expansion at infinity") {
    auto spec = parse("J", 1);
    auto inf = q_expansion_infinity(spec, 4);
    auto zero = q_expansion_zero(spec, 4);
    CHECK(series_equal(inf, zero));
}

TEST_CASE("q_expansion_zero of the hauptmodul at p=2") {
    auto spec = parse("eta(1)^24 * eta(2)^-24", 2);
    auto z = q_expansion_zero(spec, 3);
    CHECK(z.den() == 48);
    CHECK(z.coeff(Rat(-1)) == 0);
    CHECK(z.coeff(Rat(0)) == 0);
    CHECK(z.coeff(Rat(1, 2)) == 4096);
    CHECK(z.coeff(Rat(1)) == 4096 * 24);
}

TEST_CASE("Fricke-plus spec: at_zero(n) = at_infinity(p n)") {
    auto spec = parse("eta(1)^24*eta(2)^-24 + 4096*eta(2)^24*eta(1)^-24", 2);
    auto pair = cusp_expansions(spec, 4);
    for (long k = -48; k < 4 * 48; ++k) {
        Rat n = Rat(k) / 48;
        if (!pair.at_zero.covers(n) || !pair.at_infinity.covers(n * 2)) continue;
        CHECK(pair.at_zero.coeff(n) == pair.at_infinity.coeff(n * 2));
    }
}

TEST_CASE("Fricke consistency: at_zero equals the reindexed expansion of f|W_p") {
    for (long p : {2L, 3L, 5L}) {
        std::string text;
        if (p == 2) text = "eta(1)^24 * eta(2)^-24";
        if (p == 3) text = "eta(1)^12 * eta(3)^-12";
        if (p == 5) text = "eta(1)^6*eta(5)^-6 - 2*eta(5)^6*eta(1)^-6";
        auto spec = parse(text, p);
        auto zero = q_expansion_zero(spec, 3);
        auto winf = q_expansion_infinity(fricke_action(spec), 3 * p);
        for (const auto& [k, v] : zero.coeffs()) {
            // exponent k/(24p) at the zero cusp corresponds to k/24 upstairs
            CHECK(winf.coeff(Rat(k) / 24) == v);
        }
    }
}

TEST_CASE("principal_part basics") {
    CHECK(principal_part(q_expansion_infinity(parse("J", 1), 2)).size() == 1);
    CHECK(principal_part(q_expansion_infinity(parse("5", 1), 2)).empty());
}

TEST_CASE("series ring laws on random samples") {
    std::mt19937 rng(3);
    for (int i = 0; i < 220; ++i) {
        LaurentSeries a = random_series(rng), b = random_series(rng), c = random_series(rng);
        CHECK(series_equal(a + b, b + a));
        CHECK(series_equal((a + b) + c, a + (b + c)));
        CHECK(series_equal(a * b, b * a));
        CHECK(series_equal((a * b) * c, a * (b * c)));
        CHECK(series_equal(a * (b + c), a * b + a * c));
        LaurentSeries one = LaurentSeries::one(a.den(), a.trunc());
        CHECK(series_equal(a * one, a));
    }
}

TEST_CASE("series inverse is a two-sided inverse") {
    std::mt19937 rng(4);
    for (int i = 0; i < 60; ++i) {
        LaurentSeries a = random_series(rng);
        if (a.is_zero()) continue;
        LaurentSeries inv = a.inverse();
        LaurentSeries prod = a * inv;
        CHECK(prod.coeff_lattice(0) == 1);
        for (const auto& [k, v] : prod.coeffs())
            if (k != 0) CHECK(v == 0);
    }
}

TEST_CASE("E4^3 - E6^2 = 1728 eta^24 exactly to order 50") {
    long n = 51;
    LaurentSeries lhs = eisenstein_e4(n).pow(3) - eisenstein_e6(n).pow(2);
    LaurentSeries rhs = delta_series(n);
    rhs *= Rat(1728);
    for (long k = 0; k <= 50; ++k) CHECK(lhs.coeff_lattice(k) == rhs.coeff_lattice(k));
}

TEST_CASE("exact vs numeric expansion agreement") {
    using etafun::PrecisionPolicy;
    using etafun::UpperHalfPoint;
    PrecisionPolicy policy{96, 32, 8};
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> dx(-0.5, 0.5), dy(1.2, 2.0);
    std::vector<std::pair<std::string, long>> corpus = {
        {"J", 1},
        {"j", 1},
        {"5 - 1/3", 1},
        {"eta(1)^24 * eta(2)^-24", 2},
        {"eta(1)^24*eta(2)^-24 - 4096*eta(2)^24*eta(1)^-24", 2},
        {"eta(1)^12 * eta(3)^-12", 3},
        {"eta(1)^6 * eta(5)^-6", 5},
        {"eta(1)^4 * eta(7)^-4 + 3 * eta(7)^4 * eta(1)^-4", 7},
        {"eta(2)^24 * eta(1)^-24", 2},
        {"eta(3)^12 * eta(1)^-12", 3},
    };
    int cases = 0;
    for (const auto& [text, p] : corpus) {
        auto spec = parse(text, p);
        long order = 30;
        auto series = q_expansion_infinity(spec, order);
        for (int i = 0; i < 21; ++i) {
            double x = dx(rng), y = dy(rng);
            UpperHalfPoint z(Real(x, 200), Real(y, 200));
            auto direct = etafun::eval_function(spec, z, policy);
            Complex from_series = series.eval(z.z(), 256);
            // tail bound: coefficient growth e^{4 pi sqrt(n)} against
            // q-decay e^{-2 pi 1.2 n} at Im z >= 1.2
            double tail = 80.0 * std::exp(4.0 * 3.141592653589793 * std::sqrt(order * 1.0) -
                                          2.0 * 3.141592653589793 * 1.2 * order);
            double tol = tail + direct.abs_err + 1e-18;
            CHECK(abs(direct.value - from_series).to_double() < tol);
            ++cases;
        }
    }
    CHECK(cases >= 200);
}
