#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "permtail/cgf.hpp"

// Dual (tilt) points for the upper-tail analysis: the unique t_x > 0 solving
// L'(t_x) = x, together with the rate value and the derivative tables the
// expansion layer consumes.

namespace permtail::saddle {

enum class Statistic { Descents, MajorIndex };

std::string_view name(Statistic st);

// Open interval of admissible upper-tail levels:
// (1/2, 1) for descents, (1/4, 1/2) for the major index.
std::pair<double, double> admissible_interval(Statistic st);

struct SaddlePoint {
    Statistic statistic = Statistic::Descents;
    double x = 0.0;
    double t_x = 0.0;
    double sigma2 = 0.0;  // L''(t_x) of the statistic's own CGF
    double rate = 0.0;    // x*t_x - L(t_x)

    // ell_D[k] = L_D^{(k)}(t_x) for k = 1..max_order (index 0 unused).
    std::vector<double> ell_D;
    // MajorIndex only: ell_M[k] = L_M^{(k)}(t_x), h[k] = H^{(k)}(t_x) with
    // h[0] = H(t_x).
    std::vector<double> ell_M;
    std::vector<double> h;

    int max_order() const { return static_cast<int>(ell_D.size()) - 1; }
};

// Safeguarded Newton with bisection fallback on a bracket [1e-8, t_hi], t_hi
// doubled until L'(t_hi) > x. Tolerance 1e-12 on |L'(t) - x|; throws
// DomainError outside the open admissible interval (boundaries included),
// ConvergenceError after 200 iterations.
SaddlePoint solve(Statistic st, double x, int max_order = 6,
                  const cgf::EvalConfig& cfg = cgf::default_config());

// I(x) = x*t_x - L(t_x); zero in the limit x -> mean.
double rate(Statistic st, double x,
            const cgf::EvalConfig& cfg = cgf::default_config());

}  // namespace permtail::saddle
