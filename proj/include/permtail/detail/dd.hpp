#pragma once

#include <cmath>

namespace permtail::detail {

// Compensated double-double value (~31 significant digits). Used where a
// difference of two O(1/t^k) quantities cancels most of the leading digits.
struct Dd {
    double hi = 0.0;
    double lo = 0.0;

    constexpr Dd() = default;
    constexpr Dd(double h) : hi(h) {}
    constexpr Dd(double h, double l) : hi(h), lo(l) {}
};

inline Dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

// requires |a| >= |b|
inline Dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline Dd two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline Dd operator+(Dd a, Dd b) {
    Dd s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline Dd operator-(Dd a, Dd b) { return a + Dd{-b.hi, -b.lo}; }

inline Dd operator*(Dd a, Dd b) {
    Dd p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline Dd operator/(Dd a, Dd b) {
    double q1 = a.hi / b.hi;
    Dd r = a - Dd{q1} * b;
    double q2 = (r.hi + r.lo) / b.hi;
    Dd s = quick_two_sum(q1, q2);
    r = a - s * b;
    double q3 = (r.hi + r.lo) / b.hi;
    return quick_two_sum(s.hi, s.lo + q3);
}

inline double to_double(Dd a) { return a.hi + a.lo; }

// exp(t) for t >= 0 by argument halving plus a short Taylor series.
inline Dd dd_exp_pos(double t) {
    int halvings = 0;
    double r = t;
    while (r > 0.03125) {
        r *= 0.5;
        ++halvings;
    }
    Dd sum{1.0};
    Dd term{1.0};
    for (int k = 1; k <= 26; ++k) {
        term = term * Dd{r} / Dd{static_cast<double>(k)};
        sum = sum + term;
        if (std::abs(term.hi) < 1e-35) break;
    }
    for (int i = 0; i < halvings; ++i) sum = sum * sum;
    return sum;
}

// exp(t) - 1, accurate for all t; Taylor directly when |t| is small.
inline Dd dd_expm1(double t) {
    if (std::abs(t) < 0.5) {
        Dd sum{0.0};
        Dd term{1.0};
        for (int k = 1; k <= 40; ++k) {
            term = term * Dd{t} / Dd{static_cast<double>(k)};
            sum = sum + term;
            if (std::abs(term.hi) < 1e-35 * std::abs(sum.hi)) break;
        }
        return sum;
    }
    if (t > 0.0) return dd_exp_pos(t) - Dd{1.0};
    return Dd{1.0} / dd_exp_pos(-t) - Dd{1.0};
}

}  // namespace permtail::detail
