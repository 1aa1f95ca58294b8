#include <numeric>
#include <random>

#include "cmtrace/etafun.hpp"
#include "doctest.h"

using namespace cmtrace;
using namespace cmtrace::etafun;

namespace {

const PrecisionPolicy kPolicy{96, 32, 8};

UpperHalfPoint point(double x, double y, mpfr_prec_t bits = 160) {
    return UpperHalfPoint(Real(x, bits), Real(y, bits));
}

Complex mobius(const qforms::GroupElement& g, const Complex& z) {
    mpfr_prec_t p = z.prec();
    Complex num = {z.re * g.a + Real(static_cast<long>(g.b), p), z.im * g.a};
    Complex den = {z.re * g.c + Real(static_cast<long>(g.d), p), z.im * g.c};
    return num / den;
}

// ((x)) = x - floor(x) - 1/2 for non-integral x, 0 otherwise
Rat sawtooth(const Rat& x) {
    if (rat_is_integer(x)) return Rat(0);
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return x - Rat(fl) - rat(1, 2);
}

// the defining finite sum for s(d, c)
Rat dedekind_direct(long d, long c) {
    Rat s(0);
    for (long k = 1; k < c; ++k)
        s += sawtooth(rat(k, c)) * sawtooth(Rat(static_cast<long>(k) * d) / c);
    return s;
}

qforms::GroupElement random_gamma(std::mt19937& rng, int len = 8) {
    qforms::GroupElement g = qforms::GroupElement::identity();
    std::uniform_int_distribution<int> shift(-2, 2);
    std::uniform_int_distribution<int> which(0, 1);
    for (int i = 0; i < len; ++i) {
        if (which(rng))
            g = qforms::GroupElement::S() * g;
        else
            g = qforms::GroupElement::T(shift(rng)) * g;
        if (std::abs(g.a) > 50 || std::abs(g.b) > 50 || std::abs(g.c) > 50 || std::abs(g.d) > 50)
            return g;
    }
    return g;
}

}  // namespace

TEST_CASE("dedekind_sum base cases and known values") {
    CHECK(dedekind_sum(0, 1) == Rat(0));
    CHECK(dedekind_sum(1, 3) == rat(1, 18));
    CHECK(dedekind_sum(5, 1) == Rat(0));
    CHECK_THROWS_AS(dedekind_sum(2, 4), std::domain_error);
    CHECK_THROWS_AS(dedekind_sum(1, 0), std::domain_error);
}

TEST_CASE("dedekind_sum equals the defining finite sum") {
    for (long c = 1; c <= 40; ++c)
        for (long d = 0; d < c; ++d) {
            if (std::gcd(d, c) != 1) continue;
            CHECK(dedekind_sum(d, c) == dedekind_direct(d, c));
        }
}

TEST_CASE("dedekind reciprocity on random coprime pairs") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<long> dist(1, 400);
    int done = 0;
    while (done < 200) {
        long c = dist(rng), d = dist(rng);
        if (std::gcd(c, d) != 1) continue;
        ++done;
        Rat lhs = dedekind_sum(d, c) + dedekind_sum(c, d);
        Rat rhs = rat(-1, 4) + (rat(c, d) + rat(d, c) + Rat(1) / (Rat(c) * d)) / 12;
        CHECK(lhs == rhs);
    }
}

TEST_CASE("reduce_to_fd on simple inputs") {
    auto [z1, g1] = reduce_to_fd(point(0.0, 1.0), kPolicy);
    CHECK(g1.is_identity());

    auto [z2, g2] = reduce_to_fd(point(0.0, 0.5), kPolicy);
    CHECK(g2 == qforms::GroupElement::S());
    CHECK(std::abs(z2.y.to_double() - 2.0) < 1e-20);

    auto [z3, g3] = reduce_to_fd(point(10.0, 1.0), kPolicy);
    CHECK(g3 == qforms::GroupElement::T(-10));
    CHECK(std::abs(z3.x.to_double()) < 1e-20);
    CHECK(std::abs(z3.y.to_double() - 1.0) < 1e-20);
}

TEST_CASE("reduce_to_fd is the identity on CM points of reduced forms") {
    for (long long D : {3LL, 4LL, 23LL, 47LL, 100LL, 163LL}) {
        for (const auto& rep : qforms::class_reps(D)) {
            auto z = UpperHalfPoint::from_cm(qforms::cm_point(rep.form), 160);
            auto [zr, g] = reduce_to_fd(z, kPolicy);
            CHECK(g.is_identity());
        }
    }
}

TEST_CASE("eta(i) matches Gamma(1/4)/(2 pi^{3/4})") {
    auto r = eta(point(0.0, 1.0, 256), PrecisionPolicy{128, 32, 8});
    mpfr_prec_t b = 320;
    Real quarter(Rat(1, 4), b);
    Real gamma_q(b);
    mpfr_gamma(gamma_q.raw(), quarter.raw(), MPFR_RNDN);
    Real expected = gamma_q / (exp(log(real_pi(b)) * Real(Rat(3, 4), b)) * 2L);
    CHECK(std::abs((r.value.re - expected).to_double()) < 1e-30);
    CHECK(std::abs(r.value.im.to_double()) < 1e-30);
    CHECK(r.value.re.to_double() == doctest::Approx(0.76822542232605665900).epsilon(1e-15));
}

TEST_CASE("eta translation law at sampled points") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dx(-0.45, 0.45), dy(0.6, 2.0);
    for (int i = 0; i < 25; ++i) {
        double x = dx(rng), y = dy(rng);
        auto z = point(x, y);
        auto a = eta(z, kPolicy);
        auto b = eta(UpperHalfPoint(z.x + Real(1L, 160), z.y), kPolicy);
        Complex phase = cis_pi_rat(rat(1, 12), 200);
        Complex diff = b.value - a.value * phase;
        CHECK(abs(diff).to_double() < 1e-25);
    }
}

TEST_CASE("eta inversion law modulus at sampled points") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dx(-0.45, 0.45), dy(0.6, 2.0);
    for (int i = 0; i < 25; ++i) {
        double x = dx(rng), y = dy(rng);
        Complex z = point(x, y, 200).z();
        Complex minus_inv = -(Complex(1L, 200) / z);
        auto a = eta(UpperHalfPoint(minus_inv.re, minus_inv.im), kPolicy);
        auto b = eta(point(x, y), kPolicy);
        Real lhs = abs(a.value);
        Real rhs = sqrt(abs(z)) * abs(b.value);
        CHECK(std::abs((lhs - rhs).to_double()) < 1e-25);
    }
}

TEST_CASE("eta multiplier consistency: eta(gz)^24 = (cz+d)^12 eta(z)^24") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dx(-1.5, 1.5), dy(0.4, 2.2);
    for (int i = 0; i < 210; ++i) {
        auto g = random_gamma(rng);
        double x = dx(rng), y = dy(rng);
        Complex z = point(x, y, 200).z();
        Complex gz = mobius(g, z);
        auto ez = eta(UpperHalfPoint(z.re, z.im), kPolicy);
        auto egz = eta(UpperHalfPoint(gz.re, gz.im), kPolicy);
        Complex lhs = cpow_si(egz.value, 24);
        Complex czd = {z.re * g.c + Real(static_cast<long>(g.d), 200), z.im * g.c};
        Complex rhs = cpow_si(czd, 12) * cpow_si(ez.value, 24);
        Real scale = abs(rhs);
        CHECK((abs(lhs - rhs) / scale).to_double() < 1e-22);
    }
}

TEST_CASE("j at the classical CM points") {
    auto ji = j_invariant(point(0.0, 1.0), kPolicy);
    CHECK(std::abs(ji.value.re.to_double() - 1728.0) < 1e-20);

    auto z_rho = UpperHalfPoint::from_cm(qforms::cm_point({1, 1, 1}), 200);
    auto jrho = j_invariant(z_rho, kPolicy);
    CHECK(std::abs(jrho.value.re.to_double()) < 1e-20);
    CHECK(std::abs(jrho.value.im.to_double()) < 1e-20);

    auto z7 = UpperHalfPoint::from_cm(qforms::cm_point({1, 1, 2}), 200);
    auto j7 = j_invariant(z7, kPolicy);
    CHECK(std::abs(j7.value.re.to_double() + 3375.0) < 1e-18);
}

TEST_CASE("j modularity on random group elements") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dx(-1.2, 1.2), dy(0.5, 1.8);
    for (int i = 0; i < 100; ++i) {
        auto g = random_gamma(rng);
        Complex z = point(dx(rng), dy(rng), 200).z();
        Complex gz = mobius(g, z);
        auto a = j_invariant(UpperHalfPoint(z.re, z.im), kPolicy);
        auto b = j_invariant(UpperHalfPoint(gz.re, gz.im), kPolicy);
        double bound = a.abs_err + b.abs_err + 1e-20;
        CHECK(abs(a.value - b.value).to_double() < bound * 16);
    }
}

TEST_CASE("eval_function: j - 744 at i") {
    auto spec = funcdsl::parse("j - 744", 1);
    auto r = eval_function(spec, point(0.0, 1.0), kPolicy);
    CHECK(std::abs(r.value.re.to_double() - 984.0) < 1e-20);
}

TEST_CASE("eval_function: constant spec") {
    auto spec = funcdsl::parse("5", 7);
    auto r = eval_function(spec, point(0.3, 0.9), kPolicy);
    CHECK(r.value.re.to_double() == doctest::Approx(5.0).epsilon(1e-25));
    CHECK(std::abs(r.value.im.to_double()) < 1e-25);
}

TEST_CASE("eval_function: hauptmodul Fricke product is 2^12") {
    auto spec = funcdsl::parse("eta(1)^24 * eta(2)^-24", 2);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dx(-0.4, 0.4), dy(0.7, 1.6);
    for (int i = 0; i < 12; ++i) {
        Complex z = point(dx(rng), dy(rng), 200).z();
        Complex w = -(Complex(1L, 200) / (z * Complex(2L, 200)));  // W_2 z = -1/(2z)
        auto a = eval_function(spec, UpperHalfPoint(z.re, z.im), kPolicy);
        auto b = eval_function(spec, UpperHalfPoint(w.re, w.im), kPolicy);
        Complex prod = a.value * b.value;
        CHECK(std::abs(prod.re.to_double() - 4096.0) < 1e-18);
        CHECK(std::abs(prod.im.to_double()) < 1e-18);
    }
}

TEST_CASE("certified error: doubled target precision stays within the bound") {
    PrecisionPolicy tight{96, 32, 8};
    PrecisionPolicy tighter{192, 32, 8};
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> dx(-0.5, 0.5), dy(0.5, 1.5);
    auto spec = funcdsl::parse("eta(1)^24 * eta(2)^-24 - 4096 * eta(2)^24 * eta(1)^-24", 2);
    for (int i = 0; i < 10; ++i) {
        auto z = point(dx(rng), dy(rng), 420);
        auto r1 = eta(z, tight);
        auto r2 = eta(z, tighter);
        CHECK(abs(r1.value - r2.value).to_double() <= r1.abs_err);

        auto j1 = j_invariant(z, tight);
        auto j2 = j_invariant(z, tighter);
        CHECK(abs(j1.value - j2.value).to_double() <= j1.abs_err);

        auto f1 = eval_function(spec, z, tight);
        auto f2 = eval_function(spec, z, tighter);
        CHECK(abs(f1.value - f2.value).to_double() <= f1.abs_err);
    }
}

TEST_CASE("precision exhaustion carries the achieved bound") {
    // a certify target that never converges must throw, not loop
    PrecisionPolicy policy{96, 32, 3};
    int calls = 0;
    CHECK_THROWS_AS(etafun::detail::certify(
                        [&](mpfr_prec_t b) {
                            ++calls;
                            return Complex(Real(1.0 + 0.1 * calls, b), Real(0.0, b));
                        },
                        policy, 0, "unstable"),
                    precision_error);
    try {
        etafun::detail::certify(
            [&](mpfr_prec_t b) {
                ++calls;
                return Complex(Real(1.0 + 0.1 * calls, b), Real(0.0, b));
            },
            policy, 0, "unstable");
    } catch (const precision_error& e) {
        CHECK(e.achieved_bound() > 0.05);
    }
}

TEST_CASE("precision policy and input validation") {
    CHECK_THROWS_AS(([&] {
                        PrecisionPolicy bad{32, 0, 8};
                        return eta(point(0.0, 1.0), bad);
                    }()),
                    std::domain_error);
    CHECK_THROWS_AS(UpperHalfPoint(Real(0.0, 64), Real(-1.0, 64)), std::domain_error);
}
