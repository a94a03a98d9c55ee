#include "permtail/saddle.hpp"

#include <cmath>
#include <sstream>

namespace permtail::saddle {

std::string_view name(Statistic st) {
    return st == Statistic::Descents ? "descents" : "major";
}

std::pair<double, double> admissible_interval(Statistic st) {
    return st == Statistic::Descents ? std::pair{0.5, 1.0} : std::pair{0.25, 0.5};
}

namespace {

double cgf_value(Statistic st, double t, const cgf::EvalConfig& cfg) {
    return st == Statistic::Descents ? cgf::ld(t, cfg) : cgf::lm(t, cfg);
}

double cgf_deriv(Statistic st, int k, double t, const cgf::EvalConfig& cfg) {
    return st == Statistic::Descents ? cgf::ld_deriv(k, t, cfg)
                                     : cgf::lm_deriv(k, t, cfg);
}

}  // namespace

SaddlePoint solve(Statistic st, double x, int max_order,
                  const cgf::EvalConfig& cfg) {
    const auto [lo_x, hi_x] = admissible_interval(st);
    if (!(x > lo_x) || !(x < hi_x)) {
        std::ostringstream msg;
        msg << "x = " << x << " outside the admissible open interval (" << lo_x
            << ", " << hi_x << ") for " << name(st);
        throw DomainError(msg.str());
    }
    if (max_order < 2) throw DomainError("solve: max_order must be >= 2");

    constexpr double kTol = 1e-12;
    constexpr int kMaxIter = 200;

    double t_lo = 1e-8;
    double t_hi = 1.0;
    int doublings = 0;
    while (cgf_deriv(st, 1, t_hi, cfg) <= x) {
        t_hi *= 2.0;
        if (++doublings > 200) throw ConvergenceError("solve: bracket expansion failed");
    }

    double t = 0.5 * (t_lo + t_hi);
    bool converged = false;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        double f = cgf_deriv(st, 1, t, cfg) - x;
        if (std::abs(f) <= kTol) {
            converged = true;
            break;
        }
        if (f < 0.0)
            t_lo = t;
        else
            t_hi = t;
        double fp = cgf_deriv(st, 2, t, cfg);
        double next = t - f / fp;
        t = (next > t_lo && next < t_hi) ? next : 0.5 * (t_lo + t_hi);
    }
    if (!converged) throw ConvergenceError("solve: dual equation did not converge");

    SaddlePoint sp;
    sp.statistic = st;
    sp.x = x;
    sp.t_x = t;
    sp.sigma2 = cgf_deriv(st, 2, t, cfg);
    sp.rate = x * t - cgf_value(st, t, cfg);
    sp.ell_D.assign(max_order + 1, 0.0);
    for (int k = 1; k <= max_order; ++k) sp.ell_D[k] = cgf::ld_deriv(k, t, cfg);
    if (st == Statistic::MajorIndex) {
        sp.ell_M.assign(max_order + 1, 0.0);
        sp.h.assign(max_order + 1, 0.0);
        for (int k = 1; k <= max_order; ++k) sp.ell_M[k] = cgf::lm_deriv(k, t, cfg);
        for (int k = 0; k <= max_order; ++k) sp.h[k] = cgf::h_deriv(k, t, cfg);
    }
    return sp;
}

double rate(Statistic st, double x, const cgf::EvalConfig& cfg) {
    return solve(st, x, 2, cfg).rate;
}

}  // namespace permtail::saddle
