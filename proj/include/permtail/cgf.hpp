#pragma once

#include <gmpxx.h>

#include <vector>

#include "permtail/errors.hpp"

// Cumulant generating functions for the descent statistics of uniform random
// permutations:
//
//   L_D(t) = log((e^t - 1)/t)          single Uniform[0,1] increment
//   L_M(t) = integral_0^1 L_D(xt) dx   scaled-average transform
//   H(t)   = (L_D(t) - t)/2            prefactor correction
//   L_n(t) = (1/n) sum_{k=1}^n L_D(tk/n) - L_D(t/n)   finite-n transform
//
// Everything here is a pure function of its arguments plus an immutable
// EvalConfig; all routines are safe to call concurrently.

namespace permtail::cgf {

struct EvalConfig {
    double series_threshold = 0.5;  // |t| below this uses the Bernoulli series
    int series_terms = 30;          // truncation P of the series
    int quadrature_nodes = 64;      // Gauss-Legendre nodes for the L_M integrals

    // series_threshold must stay inside the series' radius (2*pi).
    void validate() const;
};

const EvalConfig& default_config();

// Bernoulli numbers as exact rationals, with the B_1 = +1/2 convention.
// B_{2k+1} = 0 for k >= 1.
mpq_class bernoulli(int k);

// Shared table B_0..B_128 (enough for series_terms up to 64).
const std::vector<mpq_class>& bernoulli_table();

// Exact representation of L_D^{(k)}(t) for t != 0:
//
//   L_D^{(k)}(t) = constant + P_k(u) + b_k / t^k,   u = 1/(e^t - 1)
//
// built from P_1(u) = u (constant 1) and P_{k+1}(u) = P_k'(u) * (-u - u^2),
// which is du/dt = -(u + u^2) applied termwise. b_k = (-1)^k (k-1)!.
struct CgfDerivRepr {
    int order = 0;
    mpq_class constant;              // 1 for order 1, else 0
    std::vector<mpz_class> u_poly;   // signed coefficients, index = power of u
    mpq_class t_pow_coeff;           // b_k

    // P_k(u) and b_k/t^k cancel heavily for moderate t (six digits at t=0.5,
    // k=6), so the evaluation runs in compensated double-double arithmetic.
    double eval(double t) const;
};

// Cached representation for order k >= 1.
const CgfDerivRepr& ld_deriv_repr(int k);

double ld(double t, const EvalConfig& cfg = default_config());
double ld_deriv(int k, double t, const EvalConfig& cfg = default_config());
double lm(double t, const EvalConfig& cfg = default_config());
double lm_deriv(int k, double t, const EvalConfig& cfg = default_config());

// H(t) and derivatives: H = (L_D - t)/2, H' = (L_D' - 1)/2, H^{(k)} = L_D^{(k)}/2.
double h_deriv(int k, double t, const EvalConfig& cfg = default_config());

// Finite-n transform as the literal sum; exp(n*ln_exact(n,t)) is the Laplace
// transform of Sigma_n/n.
double ln_exact(long n, double t, const EvalConfig& cfg = default_config());

// Euler-Maclaurin expansion of ln_exact:
//   L_M(t) + H(t)/n + t/(2n) - L_D(t/n) + Delta_{n,p}(t)/n
// with Delta_{n,p}(t) = t/(12n)(L_D'(t) - 1/2)
//                     + sum_{k=2}^p B_{2k}/(2k)! (t/n)^{2k-1} L_D^{(2k-1)}(t).
// Residual against ln_exact is O(n^{-2p-1}). Rejects t = 0.
double euler_maclaurin_ln(long n, double t, int p,
                          const EvalConfig& cfg = default_config());

// Branch internals, exposed so the continuity diagnostics can compare them
// directly at the switch point. k = 0 means the function itself.
double ld_series(int k, double t, const EvalConfig& cfg = default_config());
double ld_closed(int k, double t);
double lm_series(int k, double t, const EvalConfig& cfg = default_config());
double lm_quadrature(int k, double t, const EvalConfig& cfg = default_config());

// Gauss-Legendre rule on [0,1].
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const Quadrature& gauss_legendre_01(int points);

}  // namespace permtail::cgf
