#include "permtail/sldp.hpp"

#include <cmath>
#include <numbers>

namespace permtail::sldp {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

std::complex<double> i_pow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

void require_statistic(const SaddlePoint& sp, Statistic st, const char* op) {
    if (sp.statistic != st)
        throw DomainError(std::string(op) + ": saddle point is for the other statistic");
}

}  // namespace

FracPart frac_ceil(double x) {
    if (!std::isfinite(x)) throw DomainError("frac_ceil: x must be finite");
    double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return {0.0};
    return {std::ceil(x) - x};
}

long long snapped_ceil(double x) {
    double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)))
        return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(x));
}

// ---------------------------------------------------------------------------
// Gaussian moments
//
// I_m(a) = sqrt(2 pi) (2m)!/2^m e^{-a^2/2} sum_k (-1)^k (2a^2)^k / ((2k)!(m-k)!)
// J_m(a) = sqrt(2 pi) (2m+1)!/2^m (-ia) e^{-a^2/2}
//            * sum_k (-1)^k (2a^2)^k / ((2k+1)!(m-k)!)

namespace {

// sum coefficients without the sqrt(2 pi) e^{-a^2/2} factor, as a polynomial
// in a^2: hat_I[m][q] multiplies a^{2q}
double hat_I_coeff(int m, int q) {
    double sign = (q % 2 == 0) ? 1.0 : -1.0;
    return factorial(2 * m) / std::pow(2.0, m) * sign * std::pow(2.0, q) /
           (factorial(2 * q) * factorial(m - q));
}

double hat_J_coeff(int m, int q) {
    double sign = (q % 2 == 0) ? 1.0 : -1.0;
    return factorial(2 * m + 1) / std::pow(2.0, m) * sign * std::pow(2.0, q) /
           (factorial(2 * q + 1) * factorial(m - q));
}

}  // namespace

double gaussian_moment_I(int m, double a) {
    if (m < 0) throw DomainError("gaussian_moment_I: m must be >= 0");
    double acc = 0.0;
    for (int q = 0; q <= m; ++q) acc += hat_I_coeff(m, q) * std::pow(a, 2 * q);
    return std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * a * a) * acc;
}

std::complex<double> gaussian_moment_J(int m, double a) {
    if (m < 0) throw DomainError("gaussian_moment_J: m must be >= 0");
    double acc = 0.0;
    for (int q = 0; q <= m; ++q) acc += hat_J_coeff(m, q) * std::pow(a, 2 * q);
    return std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * a * a) * acc *
           (-kI * a);
}

// ---------------------------------------------------------------------------
// Poly / PolySeries

void Poly::add_term(int j, std::complex<double> value) {
    if (j >= static_cast<int>(c.size())) c.resize(j + 1, 0.0);
    c[j] += value;
}

bool Poly::empty() const {
    for (const auto& v : c)
        if (v != std::complex<double>{}) return false;
    return true;
}

PolySeries PolySeries::one(int order) {
    PolySeries s;
    s.truncation_order = order;
    s.terms.resize(order + 1);
    s.terms[0].add_term(0, 1.0);
    return s;
}

void PolySeries::add_monomial(int s_pow, int v_pow, std::complex<double> coeff) {
    if (s_pow > truncation_order) return;
    terms[s_pow].add_term(v_pow, coeff);
}

PolySeries PolySeries::mul(const PolySeries& other) const {
    PolySeries out;
    out.truncation_order = truncation_order;
    out.terms.resize(truncation_order + 1);
    for (int a = 0; a <= truncation_order; ++a) {
        if (terms[a].c.empty()) continue;
        for (int b = 0; a + b <= truncation_order &&
                        b <= other.truncation_order; ++b) {
            const Poly& pa = terms[a];
            const Poly& pb = other.terms[b];
            if (pb.c.empty()) continue;
            Poly& dst = out.terms[a + b];
            for (int ja = 0; ja < static_cast<int>(pa.c.size()); ++ja) {
                if (pa.c[ja] == std::complex<double>{}) continue;
                for (int jb = 0; jb < static_cast<int>(pb.c.size()); ++jb) {
                    if (pb.c[jb] == std::complex<double>{}) continue;
                    dst.add_term(ja + jb, pa.c[ja] * pb.c[jb]);
                }
            }
        }
    }
    return out;
}

void PolySeries::add_scaled(const PolySeries& other, double factor) {
    for (int k = 0; k <= truncation_order && k <= other.truncation_order; ++k) {
        const Poly& p = other.terms[k];
        for (int j = 0; j < static_cast<int>(p.c.size()); ++j) {
            if (p.c[j] != std::complex<double>{}) terms[k].add_term(j, p.c[j] * factor);
        }
    }
}

// ---------------------------------------------------------------------------
// descents series
//
// The tilted log-characteristic function reduces to
//   log Phi_n(v) = -v^2/2 + sum_{k=3}^{2p+3} (iv)^k l_D(k) / (k! sigma^k) * s^{k-2}
// after absorbing s = n^{-1/2}; exponentiating the tail and multiplying by the
// geometric expansion of (1 + iv s/(sigma t))^{-1} yields the phi_k.

PolySeries descents_psi_series(const SaddlePoint& sp, int p) {
    require_statistic(sp, Statistic::Descents, "descents_psi_series");
    if (p < 0) throw DomainError("descents_psi_series: p must be >= 0");
    if (sp.max_order() < 2 * p + 3)
        throw DomainError("descents_psi_series: derivative table too shallow; "
                          "solve with max_order >= 2p+3");

    const int smax = 2 * p + 1;
    const double sigma = std::sqrt(sp.sigma2);

    PolySeries u;
    u.truncation_order = smax;
    u.terms.resize(smax + 1);
    for (int k = 3; k <= 2 * p + 3; ++k) {
        u.add_monomial(k - 2, k,
                       i_pow(k) * sp.ell_D[k] / (factorial(k) * std::pow(sigma, k)));
    }

    // exp(u) truncated: u has s-valuation 1, so powers beyond smax vanish
    PolySeries result = PolySeries::one(smax);
    PolySeries power = PolySeries::one(smax);
    for (int m = 1; m <= smax; ++m) {
        power = power.mul(u);
        result.add_scaled(power, 1.0 / factorial(m));
    }
    return result;
}

PolySeries descents_phi_series(const SaddlePoint& sp, int p) {
    const PolySeries psi = descents_psi_series(sp, p);
    const int smax = psi.truncation_order;
    const double sigma = std::sqrt(sp.sigma2);
    const double t = sp.t_x;

    PolySeries geometric;
    geometric.truncation_order = smax;
    geometric.terms.resize(smax + 1);
    std::complex<double> g{1.0, 0.0};
    for (int j = 0; j <= smax; ++j) {
        geometric.add_monomial(j, j, g);
        g *= -kI / (sigma * t);
    }

    return psi.mul(geometric);
}

// ---------------------------------------------------------------------------
// bracket assembly
//
// Each monomial v^j s^k integrates against exp(-iav - v^2/2) to a Gaussian
// moment that is a polynomial in a (a = {nx}/(sigma sqrt(n)) = alpha s), so
// the whole bracket collapses onto integer powers of 1/n. The residual
// Gaussian factor e^{-a^2/2} is re-expanded and folded in at the end.

BracketAssembly descents_bracket_assembly(const SaddlePoint& sp, double frac_nx,
                                          int p) {
    BracketAssembly out;
    out.coeffs.assign(p + 1, 0.0);
    if (p == 0) return out;

    const PolySeries phi = descents_phi_series(sp, p);
    const double alpha = frac_nx / std::sqrt(sp.sigma2);
    const int pmax = 2 * p;

    std::vector<std::complex<double>> acc(pmax + 1, 0.0);
    for (int k = 0; k <= phi.truncation_order; ++k) {
        const Poly& poly = phi.terms[k];
        for (int j = 0; j < static_cast<int>(poly.c.size()); ++j) {
            const std::complex<double> c = poly.c[j];
            if (c == std::complex<double>{}) continue;
            if (j % 2 == 0) {
                const int m = j / 2;
                for (int q = 0; q <= m; ++q) {
                    const int pw = k + 2 * q;
                    if (pw > pmax) break;
                    acc[pw] += c * hat_I_coeff(m, q) * std::pow(alpha, 2 * q);
                }
            } else {
                const int m = (j - 1) / 2;
                for (int q = 0; q <= m; ++q) {
                    const int pw = k + 1 + 2 * q;
                    if (pw > pmax) break;
                    acc[pw] += c * (-kI) * hat_J_coeff(m, q) *
                               std::pow(alpha, 2 * q + 1);
                }
            }
        }
    }

    // fold e^{-alpha^2 s^2 / 2}
    std::vector<std::complex<double>> folded(pmax + 1, 0.0);
    for (int pw = 0; pw <= pmax; ++pw) {
        double factor = 1.0;
        for (int r = 0; pw + 2 * r <= pmax; ++r) {
            if (r > 0) factor *= -0.5 * alpha * alpha / r;
            folded[pw + 2 * r] += acc[pw] * factor;
        }
    }

    for (int pw = 0; pw <= pmax; ++pw) {
        out.max_imag = std::max(out.max_imag, std::abs(folded[pw].imag()));
        if (pw % 2 == 1)
            out.max_half_integer = std::max(out.max_half_integer,
                                            std::abs(folded[pw].real()));
    }
    for (int k = 1; k <= p; ++k) out.coeffs[k] = folded[2 * k].real();
    return out;
}

// ---------------------------------------------------------------------------
// closed-form coefficients

double d_n1(const SaddlePoint& sp, long long n) {
    require_statistic(sp, Statistic::Descents, "d_n1");
    if (sp.max_order() < 4) throw DomainError("d_n1: need derivatives to order 4");
    const double t = sp.t_x;
    const double s2 = sp.sigma2;
    const double l3 = sp.ell_D[3];
    const double l4 = sp.ell_D[4];
    const double f = frac_ceil(static_cast<double>(n) * sp.x).value;
    return (1.0 / s2) *
           (-1.0 / (t * t) - f / t - f * f / 2.0 - f * l3 / (6.0 * s2) -
            l3 / (2.0 * s2 * t) + l4 / (8.0 * s2) -
            5.0 * l3 * l3 / (24.0 * s2 * s2));
}

std::pair<double, double> a_coeffs(const SaddlePoint& sp) {
    require_statistic(sp, Statistic::MajorIndex, "a_coeffs");
    const double t = sp.t_x;
    const double a1 = -t * (1.0 + t) / 24.0 + t * sp.ell_D[1] / 12.0;
    return {a1, a1 * a1 / 2.0};
}

// ---------------------------------------------------------------------------
// major-index series through s^2
//
// Against the Gaussian weight exp(-sigma^2 w^2/2):
//   s^1:  iw H'          + (iw)^3 l_M(3)/3!
//   s^2:  (iw)^2 H''/2!  + (iw)^4 l_M(4)/4!
// multiplied by the geometric/Bernoulli factor
//   1 + (-iw/t) s + (t/2 - w^2/t^2) s^2 + ...
// where the t/2 constant is the B_1 term of z/(1 - e^{-z}).

PolySeries major_phi_series(const SaddlePoint& sp) {
    require_statistic(sp, Statistic::MajorIndex, "major_phi_series");
    if (sp.max_order() < 4)
        throw DomainError("major_phi_series: need derivative tables to order 4");

    const double t = sp.t_x;
    const int smax = 2;

    PolySeries u;
    u.truncation_order = smax;
    u.terms.resize(smax + 1);
    u.add_monomial(1, 1, kI * sp.h[1]);
    u.add_monomial(1, 3, i_pow(3) * sp.ell_M[3] / factorial(3));
    u.add_monomial(2, 2, i_pow(2) * sp.h[2] / factorial(2));
    u.add_monomial(2, 4, i_pow(4) * sp.ell_M[4] / factorial(4));

    PolySeries expu = PolySeries::one(smax);
    PolySeries power = PolySeries::one(smax);
    for (int m = 1; m <= smax; ++m) {
        power = power.mul(u);
        expu.add_scaled(power, 1.0 / factorial(m));
    }

    PolySeries factor = PolySeries::one(smax);
    factor.add_monomial(1, 1, -kI / t);
    factor.add_monomial(2, 2, -1.0 / (t * t));
    factor.add_monomial(2, 0, t / 2.0);

    return expu.mul(factor);
}

double major_c_n1_generated(const SaddlePoint& sp) {
    const PolySeries phi = major_phi_series(sp);
    const Poly& phi2 = phi.terms[2];
    // E[w^{2m}] = (2m-1)!! / sigma^{2m} under the exp(-sigma^2 w^2/2) weight;
    // odd moments enter only at higher order.
    double acc = 0.0;
    double dfact = 1.0;
    for (int m = 0; 2 * m < static_cast<int>(phi2.c.size()); ++m) {
        if (m > 0) dfact *= 2 * m - 1;
        acc += phi2.coeff(2 * m).real() * dfact / std::pow(sp.sigma2, m);
    }
    return acc;
}

double m_n1(const SaddlePoint& sp, long long n) {
    require_statistic(sp, Statistic::MajorIndex, "m_n1");
    if (sp.max_order() < 4) throw DomainError("m_n1: need derivatives to order 4");
    const double t = sp.t_x;
    const double s2 = sp.sigma2;
    const double l1 = sp.ell_D[1];
    const double h1 = sp.h[1];
    const double h2 = sp.h[2];
    const double lm3 = sp.ell_M[3];
    const double lm4 = sp.ell_M[4];
    const double f2 =
        frac_ceil(static_cast<double>(n) * static_cast<double>(n) * sp.x).value;
    return t / 2.0 - t * (1.0 + t) / 24.0 - f2 * t + t * l1 / 12.0 +
           (1.0 / s2) * (-1.0 / (t * t) + h1 / t - h2 / 2.0 - h1 * h1 / 2.0 -
                         lm3 / (2.0 * s2 * t) + lm4 / (8.0 * s2) +
                         h1 * lm3 / (2.0 * s2) -
                         5.0 * lm3 * lm3 / (24.0 * s2 * s2));
}

// ---------------------------------------------------------------------------
// tail assembly (log space throughout: the leading factor reaches e^-250 on
// the acceptance grids)

namespace {

TailApprox assemble(const SaddlePoint& sp, long long n, int p,
                    double log_leading, const std::vector<double>& coeffs) {
    TailApprox out;
    out.statistic = sp.statistic;
    out.n = n;
    out.x = sp.x;
    out.order = p;
    out.log_leading = log_leading;
    out.bracket_coeffs = coeffs;
    out.bracket_terms.assign(p + 1, 1.0);
    double sum = 1.0;
    double npow = 1.0;
    for (int k = 1; k <= p; ++k) {
        npow *= static_cast<double>(n);
        sum += coeffs[k] / npow;
        out.bracket_terms[k] = sum;
    }
    if (!(sum > 0.0))
        throw ConvergenceError("expansion bracket is not positive; n too small "
                               "for this order and x");
    out.value_log = log_leading + std::log(sum);
    return out;
}

}  // namespace

TailApprox expansion_descents(const SaddlePoint& sp, long long n, int p) {
    require_statistic(sp, Statistic::Descents, "expansion_descents");
    if (n < 2) throw DomainError("expansion_descents: n must be >= 2");
    if (p < 0) throw DomainError("expansion_descents: p must be >= 0");

    const double f = frac_ceil(static_cast<double>(n) * sp.x).value;
    const double sigma = std::sqrt(sp.sigma2);
    const double log_leading =
        -static_cast<double>(n) * sp.rate - f * sp.t_x -
        std::log(sigma * sp.t_x *
                 std::sqrt(2.0 * std::numbers::pi * static_cast<double>(n)));
    const BracketAssembly assembly = descents_bracket_assembly(sp, f, p);
    return assemble(sp, n, p, log_leading, assembly.coeffs);
}

TailApprox expansion_major(const SaddlePoint& sp, long long n, int p) {
    require_statistic(sp, Statistic::MajorIndex, "expansion_major");
    if (n < 2) throw DomainError("expansion_major: n must be >= 2");
    if (p < 0) throw DomainError("expansion_major: p must be >= 0");
    if (p > 1)
        throw OrderError("expansion_major: only orders 0 and 1 are available");

    const double sigma = std::sqrt(sp.sigma2);
    const double log_leading =
        -static_cast<double>(n) * sp.rate + sp.h[0] -
        std::log(sigma * sp.t_x *
                 std::sqrt(2.0 * std::numbers::pi * static_cast<double>(n)));
    std::vector<double> coeffs(p + 1, 0.0);
    if (p == 1) coeffs[1] = m_n1(sp, n);
    return assemble(sp, n, p, log_leading, coeffs);
}

}  // namespace permtail::sldp
