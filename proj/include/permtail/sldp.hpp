#pragma once

#include <complex>
#include <vector>

#include "permtail/saddle.hpp"

// Sharp large-deviation tail approximations:
//
//   P(D_n/n  >= x) ~ exp(-n I_D(x) - {nx} t_x) / (sigma_x t_x sqrt(2 pi n))
//                    * [1 + sum_k d_{n,k}(x)/n^k]
//   P(M_n/n^2 >= x) ~ exp(-n I_M(x) + H(t_x)) / (sigma_x t_x sqrt(2 pi n))
//                    * [1 + sum_k m_{n,k}(x)/n^k]
//
// with {y} = ceil(y) - y. For descents the bracket coefficients of any order
// are generated by truncated power-series composition of the tilted
// log-characteristic function, integrated against the Gaussian weight via the
// exact moment formulas I_m(a), J_m(a). For the major index the machinery is
// carried to the depth of the first coefficient m_{n,1}.

namespace permtail::sldp {

using saddle::SaddlePoint;
using saddle::Statistic;

// Fractional part under the ceiling convention {y} = ceil(y) - y in [0, 1).
// Values within 1e-9 (relative) of an integer snap to zero so that grid
// levels like 0.8 * 50 land exactly.
struct FracPart {
    double value = 0.0;
};
FracPart frac_ceil(double x);

// Matching snapped ceiling, i.e. x + frac_ceil(x).value as an integer.
long long snapped_ceil(double x);

// Gaussian phase moments over the whole line:
//   I_m(a) = integral v^{2m}   exp(-iav - v^2/2) dv   (real)
//   J_m(a) = integral v^{2m+1} exp(-iav - v^2/2) dv   (purely imaginary)
double gaussian_moment_I(int m, double a);
std::complex<double> gaussian_moment_J(int m, double a);

// Polynomial in one variable with complex coefficients; c[j] multiplies v^j.
struct Poly {
    std::vector<std::complex<double>> c;

    int degree() const { return static_cast<int>(c.size()) - 1; }
    std::complex<double> coeff(int j) const {
        return j >= 0 && j < static_cast<int>(c.size()) ? c[j] : 0.0;
    }
    void add_term(int j, std::complex<double> value);
    bool empty() const;
};

// Truncated series in s = n^{-1/2} with Poly coefficients. Immutable once
// built by the generators below.
struct PolySeries {
    int truncation_order = 0;     // highest retained power of s
    std::vector<Poly> terms;      // terms[k] multiplies s^k

    static PolySeries one(int order);
    void add_monomial(int s_pow, int v_pow, std::complex<double> coeff);
    PolySeries mul(const PolySeries& other) const;
    void add_scaled(const PolySeries& other, double factor);
};

// 1 + sum_k psi_k(v) s^k: the exponentiated log-characteristic tail series.
// psi_k has degree 3k and valuation k+2. Requires derivatives to order 2p+3.
PolySeries descents_psi_series(const SaddlePoint& sp, int p);

// 1 + sum_k phi_k(v) s^k for the descents bracket: the psi series times the
// geometric factor (1 + iv/(sigma t sqrt(n)))^{-1}. phi_k has degree 3k; odd
// k carries only odd powers of v with purely imaginary coefficients, even k
// only even powers with real coefficients.
PolySeries descents_phi_series(const SaddlePoint& sp, int p);

// Major-index analogue through s^2 (the depth m_{n,1} needs): includes the
// H-derivative corrections and the Bernoulli factor of the discrete geometric
// tail, with the Gaussian weight exp(-sigma^2 w^2 / 2) left implicit.
PolySeries major_phi_series(const SaddlePoint& sp);

// Whole-power bracket coefficients plus parity diagnostics. The half-integer
// powers of n cancel structurally; the residuals are reported so tests can
// pin the cancellation.
struct BracketAssembly {
    std::vector<double> coeffs;     // coeffs[k] = d_{n,k}, k = 1..p ([0] unused)
    double max_half_integer = 0.0;  // largest |odd-power| residual
    double max_imag = 0.0;          // largest imaginary residual
};
BracketAssembly descents_bracket_assembly(const SaddlePoint& sp, double frac_nx,
                                          int p);

// First-order coefficients in closed form.
//
// d_n1 evaluates the two-line display for d_{n,1}(x) literally, including its
// {nx} l_D(3)/6 term; the generated coefficient from descents_bracket_assembly
// carries {nx} l_D(3)/2 instead. The two agree wherever nx is an integer; a
// diagnostic test records the difference elsewhere.
double d_n1(const SaddlePoint& sp, long long n);

// a_1 = -t(1+t)/24 + t l_D(1)/12 and a_2 = a_1^2/2 (major index only).
std::pair<double, double> a_coeffs(const SaddlePoint& sp);

// Gaussian-averaged phi_2 of the major-index series: the n^{-1} coefficient
// before the a_k(x) prefactor corrections and the {n^2 x} shift.
double major_c_n1_generated(const SaddlePoint& sp);

// m_{n,1}(x) closed form; equals a_1 - {n^2 x} t_x + c_{n,1}.
double m_n1(const SaddlePoint& sp, long long n);

struct TailApprox {
    Statistic statistic = Statistic::Descents;
    long long n = 0;
    double x = 0.0;
    int order = 0;
    double log_leading = 0.0;            // log of the prefactor
    std::vector<double> bracket_coeffs;  // [k] = coefficient at n^{-k}, k>=1
    std::vector<double> bracket_terms;   // partial sums, [q] = 1 + sum_{k<=q}
    double value_log = 0.0;              // log_leading + log(bracket_terms[order])
};

// Descents tail at any order p >= 0; the saddle point must carry derivatives
// through order 2p+3.
TailApprox expansion_descents(const SaddlePoint& sp, long long n, int p);

// Major-index tail for p in {0, 1}; higher orders raise OrderError.
TailApprox expansion_major(const SaddlePoint& sp, long long n, int p);

}  // namespace permtail::sldp
