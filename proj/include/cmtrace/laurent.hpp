#ifndef CMTRACE_LAURENT_HPP
#define CMTRACE_LAURENT_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmtrace/complexnum.hpp"
#include "cmtrace/rational.hpp"

namespace cmtrace {

// Exact Laurent series in q^{1/den} with rational coefficients, finitely many
// negative exponents, truncated at a stated order. Exponents are stored in
// lattice units: key k represents q^{k/den}. Coefficients are valid exactly
// for all lattice exponents < trunc.
class LaurentSeries {
public:
    LaurentSeries() : den_(1), trunc_(0) {}
    LaurentSeries(long den, long trunc) : den_(den), trunc_(trunc) {
        if (den <= 0) throw std::domain_error("LaurentSeries: den must be positive");
    }

    long den() const { return den_; }
    long trunc() const { return trunc_; }
    bool is_zero() const { return c_.empty(); }
    const std::map<long, Rat>& coeffs() const { return c_; }

    // valuation in lattice units; trunc() for the zero series
    long valuation() const { return c_.empty() ? trunc_ : c_.begin()->first; }

    Rat coeff_lattice(long k) const {
        auto it = c_.find(k);
        return it == c_.end() ? Rat(0) : it->second;
    }

    // coefficient of q^e for rational e; zero when e is off the lattice
    Rat coeff(const Rat& e) const {
        Rat scaled = e * den_;
        if (!rat_is_integer(scaled)) return Rat(0);
        return coeff_lattice(rat_to_long(scaled));
    }

    void set_lattice(long k, const Rat& v) {
        if (k >= trunc_) throw std::domain_error("LaurentSeries::set: exponent beyond truncation");
        if (v == 0)
            c_.erase(k);
        else
            c_[k] = v;
    }

    // Whether coefficient q^e is covered by the stored truncation.
    bool covers(const Rat& e) const {
        Rat scaled = e * den_;
        if (!rat_is_integer(scaled)) return true;
        return rat_to_long(scaled) < trunc_;
    }

    std::vector<std::pair<Rat, Rat>> principal_part() const {
        std::vector<std::pair<Rat, Rat>> out;
        for (const auto& [k, v] : c_) {
            if (k >= 0) break;
            out.emplace_back(Rat(k) / den_, v);
        }
        return out;
    }

    LaurentSeries& operator*=(const Rat& s) {
        if (s == 0) {
            c_.clear();
        } else {
            for (auto& [k, v] : c_) v *= s;
        }
        return *this;
    }

    friend LaurentSeries operator+(const LaurentSeries& x, const LaurentSeries& y) {
        check_den(x, y);
        LaurentSeries out(x.den_, std::min(x.trunc_, y.trunc_));
        out.c_ = x.c_;
        for (const auto& [k, v] : y.c_) {
            Rat& t = out.c_[k];
            t += v;
            if (t == 0) out.c_.erase(k);
        }
        out.drop_tail();
        return out;
    }

    friend LaurentSeries operator-(const LaurentSeries& x, const LaurentSeries& y) {
        LaurentSeries ny = y;
        ny *= Rat(-1);
        return x + ny;
    }

    friend LaurentSeries operator*(const LaurentSeries& x, const LaurentSeries& y) {
        check_den(x, y);
        long trunc = std::min(x.trunc_ + y.valuation(), y.trunc_ + x.valuation());
        LaurentSeries out(x.den_, trunc);
        for (const auto& [i, xi] : x.c_) {
            for (const auto& [j, yj] : y.c_) {
                if (i + j >= trunc) break;
                Rat& t = out.c_[i + j];
                t += xi * yj;
                if (t == 0) out.c_.erase(i + j);
            }
        }
        return out;
    }

    LaurentSeries pow(long e) const {
        if (e < 0) return inverse().pow(-e);
        LaurentSeries out = one(den_, trunc_val_pow(e));
        LaurentSeries base = *this;
        long ee = e;
        while (ee) {
            if (ee & 1) out = out * base;
            ee >>= 1;
            if (ee) base = base * base;
        }
        return out;
    }

    // Multiplicative inverse, defined for nonzero series.
    LaurentSeries inverse() const {
        if (c_.empty()) throw std::domain_error("LaurentSeries::inverse of zero series");
        long v = valuation();
        long len = trunc_ - v;  // unit part known to this many lattice steps
        Rat lead = c_.begin()->second;
        // b = (s / (lead q^v)) has b_0 = 1; invert by the standard recurrence.
        std::map<long, Rat> a;  // unit-part coefficients, index >= 0
        for (const auto& [k, val] : c_) a[k - v] = val / lead;
        std::map<long, Rat> b;
        b[0] = Rat(1);
        // dense recurrence over present indices only
        std::vector<long> support;
        for (const auto& [k, val] : a)
            if (k > 0) support.push_back(k);
        std::map<long, Rat> known;  // b so far
        known[0] = Rat(1);
        for (long n = 1; n < len; ++n) {
            Rat s(0);
            for (long k : support) {
                if (k > n) break;
                auto it = known.find(n - k);
                if (it != known.end()) s += a[k] * it->second;
            }
            if (s != 0) known[n] = -s;
        }
        LaurentSeries out(den_, len - v);
        for (const auto& [k, val] : known) {
            if (k - v >= out.trunc_) continue;
            out.c_[k - v] = val / lead;
        }
        return out;
    }

    // Rebase onto a finer lattice; factor must be a positive integer.
    LaurentSeries rebase(long new_den) const {
        if (new_den % den_ != 0) throw std::domain_error("LaurentSeries::rebase: incompatible lattice");
        long f = new_den / den_;
        LaurentSeries out(new_den, trunc_ * f);
        for (const auto& [k, v] : c_) out.c_[k * f] = v;
        return out;
    }

    // Multiply by q^{off/den}.
    LaurentSeries shift_lattice(long off) const {
        LaurentSeries out(den_, trunc_ + off);
        for (const auto& [k, v] : c_) out.c_[k + off] = v;
        return out;
    }

    // Reinterpret q -> q^{1/f} (used for expansions in z/p): exponents divide by f.
    LaurentSeries stretch_den(long f) const {
        LaurentSeries out(den_ * f, trunc_);
        out.c_ = c_;
        return out;
    }

    static LaurentSeries one(long den, long trunc) {
        LaurentSeries s(den, trunc);
        if (trunc > 0) s.c_[0] = Rat(1);
        return s;
    }

    static LaurentSeries constant(const Rat& v, long den, long trunc) {
        LaurentSeries s(den, trunc);
        if (trunc > 0 && v != 0) s.c_[0] = v;
        return s;
    }

    std::string str(std::size_t max_terms = 12) const {
        std::string out;
        std::size_t n = 0;
        for (const auto& [k, v] : c_) {
            if (n++ >= max_terms) {
                out += " + ...";
                break;
            }
            if (!out.empty()) out += " + ";
            out += rat_str(v) + "*q^(" + std::to_string(k) + "/" + std::to_string(den_) + ")";
        }
        if (out.empty()) out = "0";
        return out + "  [O(q^" + std::to_string(trunc_) + "/" + std::to_string(den_) + ")]";
    }

    // Numeric evaluation of the truncated series at a point of the upper half
    // plane (test and cross-check use).
    Complex eval(const Complex& z, mpfr_prec_t prec) const {
        Complex out(prec);
        Complex zden = {z.re / den_, z.im / den_};
        for (const auto& [k, v] : c_) {
            Complex term = cis2pi(Complex{zden.re * static_cast<long>(k), zden.im * static_cast<long>(k)});
            out += term * Real(v, prec);
        }
        return out;
    }

private:
    static void check_den(const LaurentSeries& x, const LaurentSeries& y) {
        if (x.den_ != y.den_)
            throw std::domain_error("LaurentSeries: mixed exponent lattices " +
                                    std::to_string(x.den_) + " vs " + std::to_string(y.den_));
    }

    long trunc_val_pow(long e) const {
        if (e == 0) return trunc_;
        long v = valuation();
        // s known mod q^t with valuation v: s^e known mod q^{t + (e-1) v}
        return trunc_ + (e - 1) * v;
    }

    void drop_tail() {
        for (auto it = c_.begin(); it != c_.end();) {
            if (it->first >= trunc_)
                it = c_.erase(it);
            else
                ++it;
        }
    }

    long den_;
    long trunc_;
    std::map<long, Rat> c_;
};

// prod_{n>=1} (1 - x^n) to x-order < n_terms, on the given lattice with
// x = q^{step/den} (step in lattice units).
inline LaurentSeries euler_product(long n_terms, long den, long step) {
    LaurentSeries s(den, n_terms * step);
    s.set_lattice(0, Rat(1));
    for (long k = 1;; ++k) {
        long e1 = k * (3 * k - 1) / 2;
        long e2 = k * (3 * k + 1) / 2;
        if (e1 >= n_terms && e2 >= n_terms) break;
        Rat sign((k % 2) ? -1 : 1);
        if (e1 < n_terms) s.set_lattice(e1 * step, sign);
        if (e2 < n_terms) s.set_lattice(e2 * step, sign);
    }
    return s;
}

namespace detail {
inline std::vector<Int> divisor_power_sums(long n_terms, unsigned power) {
    std::vector<Int> out(std::max<long>(n_terms, 1), Int(0));
    for (long d = 1; d < n_terms; ++d) {
        Int dp;
        mpz_ui_pow_ui(dp.get_mpz_t(), static_cast<unsigned long>(d), power);
        for (long m = d; m < n_terms; m += d) out[m] += dp;
    }
    return out;
}
}  // namespace detail

// Eisenstein series E4 = 1 + 240 sum sigma_3(n) q^n on a den=1 lattice.
inline LaurentSeries eisenstein_e4(long n_terms) {
    LaurentSeries s(1, n_terms);
    s.set_lattice(0, Rat(1));
    auto sig = detail::divisor_power_sums(n_terms, 3);
    for (long n = 1; n < n_terms; ++n) s.set_lattice(n, Rat(240) * Rat(sig[n]));
    return s;
}

// E6 = 1 - 504 sum sigma_5(n) q^n.
inline LaurentSeries eisenstein_e6(long n_terms) {
    LaurentSeries s(1, n_terms);
    s.set_lattice(0, Rat(1));
    auto sig = detail::divisor_power_sums(n_terms, 5);
    for (long n = 1; n < n_terms; ++n) s.set_lattice(n, Rat(-504) * Rat(sig[n]));
    return s;
}

// q prod (1-q^n)^24 = eta^24 as a series with integer exponents.
inline LaurentSeries delta_series(long n_terms) {
    LaurentSeries e = euler_product(n_terms, 1, 1);
    return e.pow(24).shift_lattice(1);
}

// j = E4^3 / Delta with integer exponents: q^{-1} + 744 + 196884 q + ...
inline LaurentSeries j_series(long n_terms) {
    long n = n_terms + 3;
    LaurentSeries num = eisenstein_e4(n).pow(3);
    LaurentSeries dinv = delta_series(n).inverse();
    return num * dinv;
}

}  // namespace cmtrace

#endif
