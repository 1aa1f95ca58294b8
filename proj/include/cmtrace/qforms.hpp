#ifndef CMTRACE_QFORMS_HPP
#define CMTRACE_QFORMS_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmtrace/rational.hpp"
#include "cmtrace/util.hpp"

namespace cmtrace::qforms {

// Positive definite integral binary quadratic form a x^2 + b xy + c y^2
// of discriminant b^2 - 4ac < 0.
struct QuadForm {
    long long a = 0;
    long long b = 0;
    long long c = 0;

    long long disc() const { return b * b - 4 * a * c; }
    bool positive_definite() const { return a > 0 && disc() < 0; }

    // Gauss convention: -a < b <= a <= c, and b >= 0 whenever a == c or b == a.
    bool is_reduced() const {
        if (!positive_definite()) return false;
        if (!(-a < b && b <= a && a <= c)) return false;
        if (a == c && b < 0) return false;
        return true;
    }

    friend bool operator==(const QuadForm& x, const QuadForm& y) {
        return x.a == y.a && x.b == y.b && x.c == y.c;
    }
    friend bool operator<(const QuadForm& x, const QuadForm& y) {
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.c < y.c;
    }

    std::string str() const {
        return "[" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "]";
    }
};

struct GroupElement {
    long long a = 1, b = 0, c = 0, d = 1;

    long long det() const { return a * d - b * c; }

    static GroupElement identity() { return {}; }
    static GroupElement S() { return {0, -1, 1, 0}; }
    static GroupElement T(long long k) { return {1, k, 0, 1}; }

    GroupElement inverse() const { return {d, -b, -c, a}; }

    bool in_gamma0(long long p) const { return c % p == 0; }
    bool is_identity() const { return a == 1 && b == 0 && c == 0 && d == 1; }

    friend GroupElement operator*(const GroupElement& g, const GroupElement& h) {
        return {g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
                g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d};
    }
    friend bool operator==(const GroupElement& g, const GroupElement& h) {
        return g.a == h.a && g.b == h.b && g.c == h.c && g.d == h.d;
    }
};

// CM point (-b + i sqrt(D)) / (2a) attached to a positive definite form.
struct CMPoint {
    long long a = 1;
    long long b = 0;
    long long D = 4;

    Rat real_part() const { return rat(static_cast<long>(-b), static_cast<long>(2 * a)); }
};

enum class Group { SL2Z, Gamma0p, Gamma0pStar };

struct ClassRep {
    QuadForm form;
    int stabilizer_order = 1;  // order of the image in PSL_2; always 1, 2 or 3
    bool fricke_fixed = false;
    Group group = Group::SL2Z;

    // 1/weight is the multiplicity of the class in a stabilizer-weighted trace.
    int weight_denominator() const {
        return stabilizer_order * ((group == Group::Gamma0pStar && fricke_fixed) ? 2 : 1);
    }
};

// Left action with alpha_{g.Q} = g(alpha_Q): (g.Q)(x,y) = Q(dx - by, -cx + ay).
inline QuadForm act(const GroupElement& g, const QuadForm& f) {
    long long a2 = f.a * g.d * g.d - f.b * g.d * g.c + f.c * g.c * g.c;
    long long b2 = -2 * f.a * g.b * g.d + f.b * (g.a * g.d + g.b * g.c) - 2 * f.c * g.a * g.c;
    long long c2 = f.a * g.b * g.b - f.b * g.a * g.b + f.c * g.a * g.a;
    return {a2, b2, c2};
}

// Gauss reduction; returns the reduced representative and a witness g with
// g.form == reduced.
inline std::pair<QuadForm, GroupElement> reduce(const QuadForm& form) {
    if (!form.positive_definite())
        throw std::domain_error("reduce: form is not positive definite: " + form.str());
    QuadForm f = form;
    GroupElement g = GroupElement::identity();
    for (;;) {
        if (-f.a < f.b && f.b <= f.a && f.a <= f.c) {
            if (f.a == f.c && f.b < 0) {
                g = GroupElement::S() * g;
                f = act(GroupElement::S(), f);
                continue;
            }
            break;
        }
        if (f.b > f.a || f.b <= -f.a) {
            long long k = floor_div(f.b + f.a - 1, 2 * f.a);
            GroupElement t = GroupElement::T(k);  // b -> b - 2ak, landing in (-a, a]
            g = t * g;
            f = act(t, f);
            continue;
        }
        if (f.a > f.c) {
            g = GroupElement::S() * g;
            f = act(GroupElement::S(), f);
            continue;
        }
        break;
    }
    return {f, g};
}

// Automorphism group of a reduced form inside SL2(Z) (including -I).
// Size 2 generically, 4 for multiples of [a,0,a], 6 for multiples of [a,a,a].
inline std::vector<GroupElement> automorphisms(const QuadForm& reduced_form) {
    std::vector<GroupElement> out = {GroupElement::identity(), {-1, 0, 0, -1}};
    if (reduced_form.b == 0 && reduced_form.a == reduced_form.c) {
        out.push_back({0, -1, 1, 0});
        out.push_back({0, 1, -1, 0});
    }
    if (reduced_form.a == reduced_form.b && reduced_form.b == reduced_form.c) {
        out.push_back({0, -1, 1, 1});
        out.push_back({0, 1, -1, -1});
        out.push_back({-1, -1, 1, 0});
        out.push_back({1, 1, -1, 0});
    }
    return out;
}

inline int stabilizer_order_sl2(const QuadForm& reduced_form) {
    if (reduced_form.a == reduced_form.b && reduced_form.b == reduced_form.c) return 3;
    if (reduced_form.b == 0 && reduced_form.a == reduced_form.c) return 2;
    return 1;
}

// One reduced representative per SL2(Z)-class of discriminant -D.
// Non-fundamental discriminants are included (forms need not be primitive).
inline std::vector<ClassRep> class_reps(long long D) {
    std::vector<ClassRep> out;
    if (D <= 0) return out;
    long long r = D % 4;
    if (r == 1 || r == 2) return out;
    for (long long a = 1; 3 * a * a <= D; ++a) {
        for (long long b = -a + 1; b <= a; ++b) {
            if ((b * b + D) % (4 * a) != 0) continue;
            long long c = (b * b + D) / (4 * a);
            if (c < a) continue;
            if (a == c && b < 0) continue;
            QuadForm f{a, b, c};
            out.push_back({f, stabilizer_order_sl2(f), false, Group::SL2Z});
        }
    }
    return out;
}

// Returns a witness gamma in Gamma_0(p) with gamma.f1 == f2, if one exists.
inline std::optional<GroupElement> gamma0p_transform(const QuadForm& f1, const QuadForm& f2,
                                                     long long p) {
    if (f1.disc() != f2.disc())
        throw std::domain_error("gamma0p_transform: discriminant mismatch");
    auto [r1, g1] = reduce(f1);
    auto [r2, g2] = reduce(f2);
    if (!(r1 == r2)) return std::nullopt;
    GroupElement g2i = g2.inverse();
    for (const auto& u : automorphisms(r1)) {
        GroupElement g = g2i * u * g1;
        if (g.in_gamma0(p)) return g;
    }
    return std::nullopt;
}

inline bool is_gamma0p_equivalent(const QuadForm& f1, const QuadForm& f2, long long p) {
    return gamma0p_transform(f1, f2, p).has_value();
}

// Stabilizer order of f in the image of Gamma_0(p) in PSL_2.
inline int stabilizer_order_gamma0p(const QuadForm& f, long long p) {
    auto [r, g] = reduce(f);
    GroupElement gi = g.inverse();
    int n = 0;
    for (const auto& u : automorphisms(r))
        if ((gi * u * g).in_gamma0(p)) ++n;
    return n / 2;  // mod +-1
}

inline bool is_prime(long long p) {
    if (p < 2) return false;
    for (long long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

// Fricke involution on forms with p | a: [a,b,c] -> [pc,-b,a/p].
inline QuadForm fricke_involution(const QuadForm& f, long long p) {
    if (f.a % p != 0) throw std::domain_error("fricke_involution: p does not divide a");
    return {p * f.c, -f.b, f.a / p};
}

// Representatives of Q_{D,p} / Gamma_0(p) (fricke=false) or / Gamma_0^*(p)
// (fricke=true). Candidates come from the p+1 coset representatives
// {I} u {S T^j} applied to the SL2(Z)-class representatives, filtered by p|a
// and deduplicated with is_gamma0p_equivalent.
inline std::vector<ClassRep> class_reps_p(long long D, long long p, bool fricke) {
    if (p != 1 && !is_prime(p))
        throw std::domain_error("class_reps_p: level must be 1 or prime, got " + std::to_string(p));
    if (p == 1) {
        auto reps = class_reps(D);
        // Gamma_0^*(1) = SL2(Z): the Fricke matrix is already in the group,
        // so folding is a no-op at level 1.
        for (auto& r : reps) r.group = fricke ? Group::Gamma0pStar : Group::Gamma0p;
        return reps;
    }
    std::vector<GroupElement> cosets = {GroupElement::identity()};
    for (long long j = 0; j < p; ++j) cosets.push_back(GroupElement::S() * GroupElement::T(j));

    std::vector<ClassRep> reps;
    for (const auto& base : class_reps(D)) {
        for (const auto& g : cosets) {
            QuadForm cand = act(g, base.form);
            if (cand.a % p != 0) continue;
            bool seen = false;
            for (const auto& r : reps)
                if (is_gamma0p_equivalent(cand, r.form, p)) {
                    seen = true;
                    break;
                }
            if (!seen)
                reps.push_back({cand, stabilizer_order_gamma0p(cand, p), false, Group::Gamma0p});
        }
    }
    if (!fricke) return reps;

    std::vector<ClassRep> folded;
    std::vector<bool> used(reps.size(), false);
    for (std::size_t i = 0; i < reps.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        QuadForm w = fricke_involution(reps[i].form, p);
        ClassRep rep = reps[i];
        rep.group = Group::Gamma0pStar;
        if (is_gamma0p_equivalent(w, reps[i].form, p)) {
            rep.fricke_fixed = true;
        } else {
            bool merged = false;
            for (std::size_t j = i + 1; j < reps.size(); ++j) {
                if (!used[j] && is_gamma0p_equivalent(w, reps[j].form, p)) {
                    used[j] = true;
                    merged = true;
                    break;
                }
            }
            if (!merged)
                throw std::logic_error("class_reps_p: Fricke image not found among classes");
        }
        folded.push_back(rep);
    }
    return folded;
}

inline CMPoint cm_point(const QuadForm& f) {
    if (!f.positive_definite())
        throw std::domain_error("cm_point: form is not positive definite: " + f.str());
    return {f.a, f.b, -f.disc()};
}

}  // namespace cmtrace::qforms

#endif
