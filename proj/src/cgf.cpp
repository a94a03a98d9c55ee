#include "permtail/cgf.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <numbers>

#include "permtail/detail/dd.hpp"

namespace permtail::cgf {

namespace {

constexpr int kMaxSeriesTerms = 64;   // Bernoulli table covers B_0..B_128
constexpr int kMaxSeriesDeriv = 16;   // highest derivative the series serves

mpq_class binom_q(unsigned n, unsigned k) {
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return {b};
}

std::vector<mpq_class> build_bernoulli(int max_index) {
    // Defining recurrence for the B_1 = -1/2 variant:
    //   sum_{k=0}^{m} C(m+1,k) B_k = 0  for m >= 1
    // then the sign of B_1 is flipped to the +1/2 convention.
    std::vector<mpq_class> b(max_index + 1);
    b[0] = 1;
    for (int m = 1; m <= max_index; ++m) {
        mpq_class acc = 0;
        for (int k = 0; k < m; ++k) acc += binom_q(m + 1, k) * b[k];
        b[m] = -acc / binom_q(m + 1, m);
    }
    if (max_index >= 1) b[1] = mpq_class(1, 2);
    return b;
}

}  // namespace

void EvalConfig::validate() const {
    if (!(series_threshold > 0.0) || !(series_threshold < 2.0 * std::numbers::pi))
        throw DomainError("series_threshold must lie in (0, 2*pi)");
    if (series_terms < 10 || series_terms > kMaxSeriesTerms)
        throw DomainError("series_terms must lie in [10, 64]");
    if (quadrature_nodes < 2 || quadrature_nodes > 512)
        throw DomainError("quadrature_nodes must lie in [2, 512]");
}

const EvalConfig& default_config() {
    static const EvalConfig cfg{};
    return cfg;
}

const std::vector<mpq_class>& bernoulli_table() {
    static const std::vector<mpq_class> table = build_bernoulli(2 * kMaxSeriesTerms);
    return table;
}

mpq_class bernoulli(int k) {
    if (k < 0) throw DomainError("bernoulli: index must be non-negative");
    const auto& table = bernoulli_table();
    if (k < static_cast<int>(table.size())) return table[k];
    return build_bernoulli(k)[k];
}

// ---------------------------------------------------------------------------
// series coefficients
//
// L_D(t) = t/2 + sum_{m>=1} B_{2m} t^{2m} / (2m (2m)!), so
//   d^k/dt^k of the m-th term has coefficient B_{2m} / (2m (2m-k)!),
// and for L_M(t) = t/4 + sum B_{2m} t^{2m} / (2m (2m+1)!) the k-th derivative
// coefficient is B_{2m} / (2m (2m+1) (2m-k)!).

namespace {

struct SeriesTables {
    // [k][m], m = 1..kMaxSeriesTerms, k = 0..kMaxSeriesDeriv
    std::array<std::array<double, kMaxSeriesTerms + 1>, kMaxSeriesDeriv + 1> ld{};
    std::array<std::array<double, kMaxSeriesTerms + 1>, kMaxSeriesDeriv + 1> lm{};
};

const SeriesTables& series_tables() {
    static const SeriesTables tables = [] {
        SeriesTables t;
        const auto& bern = bernoulli_table();
        for (int k = 0; k <= kMaxSeriesDeriv; ++k) {
            for (int m = 1; m <= kMaxSeriesTerms; ++m) {
                if (2 * m < k) continue;
                mpz_class fact;
                mpz_fac_ui(fact.get_mpz_t(), 2 * m - k);
                mpq_class cl = bern[2 * m] / (mpq_class(2 * m) * mpq_class(fact));
                t.ld[k][m] = cl.get_d();
                mpq_class cm = cl / mpq_class(2 * m + 1);
                t.lm[k][m] = cm.get_d();
            }
        }
        return t;
    }();
    return tables;
}

double eval_series(const std::array<std::array<double, kMaxSeriesTerms + 1>,
                                    kMaxSeriesDeriv + 1>& coeff,
                   double linear0, double linear1, int k, double t,
                   const EvalConfig& cfg) {
    if (k > kMaxSeriesDeriv) throw DomainError("series derivative order too large");
    double acc = 0.0;
    // descending m keeps adding the smallest terms first
    for (int m = cfg.series_terms; m >= 1; --m) {
        if (2 * m < k) continue;
        acc += coeff[k][m] * std::pow(t, 2 * m - k);
    }
    if (k == 0) acc += linear0 * t;
    if (k == 1) acc += linear1;
    return acc;
}

}  // namespace

double ld_series(int k, double t, const EvalConfig& cfg) {
    return eval_series(series_tables().ld, 0.5, 0.5, k, t, cfg);
}

double lm_series(int k, double t, const EvalConfig& cfg) {
    return eval_series(series_tables().lm, 0.25, 0.25, k, t, cfg);
}

// ---------------------------------------------------------------------------
// closed forms

namespace {

double ld_closed_value(double t) {
    // log((e^t - 1)/t) without overflow at large |t|
    if (t > 0.0) return t - std::log(t) + std::log1p(-std::exp(-t));
    return std::log(-std::expm1(t)) - std::log(-t);
}

}  // namespace

const CgfDerivRepr& ld_deriv_repr(int k) {
    if (k < 1) throw DomainError("ld_deriv_repr: order must be >= 1");
    static std::deque<CgfDerivRepr> cache;  // stable references under growth
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    if (cache.empty()) {
        CgfDerivRepr first;
        first.order = 1;
        first.constant = 1;
        first.u_poly = {mpz_class(0), mpz_class(1)};  // P_1(u) = u
        first.t_pow_coeff = -1;                       // b_1 = -1
        cache.push_back(std::move(first));
    }
    while (static_cast<int>(cache.size()) < k) {
        const CgfDerivRepr& prev = cache.back();
        CgfDerivRepr next;
        next.order = prev.order + 1;
        next.constant = 0;
        // P' * (-u - u^2): derivative coefficient l*c_l lands on powers l and l+1
        next.u_poly.assign(prev.u_poly.size() + 1, mpz_class(0));
        for (std::size_t l = 1; l < prev.u_poly.size(); ++l) {
            mpz_class d = mpz_class(static_cast<long>(l)) * prev.u_poly[l];
            next.u_poly[l] -= d;
            next.u_poly[l + 1] -= d;
        }
        next.t_pow_coeff = prev.t_pow_coeff * mpq_class(-prev.order);
        cache.push_back(std::move(next));
    }
    return cache[k - 1];
}

double CgfDerivRepr::eval(double t) const {
    using detail::Dd;
    Dd u = Dd{1.0} / detail::dd_expm1(t);
    Dd acc{0.0};
    for (std::size_t l = u_poly.size(); l-- > 0;) {
        acc = acc * u + Dd{u_poly[l].get_d()};
    }
    Dd tp{1.0};
    for (int i = 0; i < order; ++i) tp = tp * Dd{t};
    acc = acc + Dd{t_pow_coeff.get_d()} / tp;
    acc = acc + Dd{constant.get_d()};
    return to_double(acc);
}

double ld_closed(int k, double t) {
    if (k == 0) return ld_closed_value(t);
    return ld_deriv_repr(k).eval(t);
}

double ld(double t, const EvalConfig& cfg) {
    if (std::abs(t) < cfg.series_threshold) return ld_series(0, t, cfg);
    return ld_closed_value(t);
}

double ld_deriv(int k, double t, const EvalConfig& cfg) {
    if (k < 1) throw DomainError("ld_deriv: order must be >= 1");
    if (std::abs(t) < cfg.series_threshold) return ld_series(k, t, cfg);
    return ld_deriv_repr(k).eval(t);
}

double h_deriv(int k, double t, const EvalConfig& cfg) {
    if (k < 0) throw DomainError("h_deriv: order must be >= 0");
    if (k == 0) return 0.5 * (ld(t, cfg) - t);
    if (k == 1) return 0.5 * (ld_deriv(1, t, cfg) - 1.0);
    return 0.5 * ld_deriv(k, t, cfg);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre on [0,1]

const Quadrature& gauss_legendre_01(int points) {
    static std::map<int, Quadrature> cache;
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;

    Quadrature q;
    q.nodes.resize(points);
    q.weights.resize(points);
    const int half = (points + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev guess, Newton on P_points
        double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= points; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = points * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.nodes[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1]
        q.weights[i] = 0.5 * w;
        q.nodes[points - 1 - i] = 0.5 * (1.0 + x);
        q.weights[points - 1 - i] = 0.5 * w;
    }
    return cache.emplace(points, std::move(q)).first->second;
}

double lm_quadrature(int k, double t, const EvalConfig& cfg) {
    const Quadrature& q = gauss_legendre_01(cfg.quadrature_nodes);
    double acc = 0.0;
    for (int i = 0; i < cfg.quadrature_nodes; ++i) {
        double x = q.nodes[i];
        double f = (k == 0) ? ld(x * t, cfg) : ld_deriv(k, x * t, cfg);
        acc += q.weights[i] * std::pow(x, k) * f;
    }
    return acc;
}

double lm(double t, const EvalConfig& cfg) {
    if (std::abs(t) < cfg.series_threshold) return lm_series(0, t, cfg);
    return lm_quadrature(0, t, cfg);
}

double lm_deriv(int k, double t, const EvalConfig& cfg) {
    if (k < 0) throw DomainError("lm_deriv: order must be >= 0");
    if (k == 0) return lm(t, cfg);
    if (std::abs(t) < cfg.series_threshold) return lm_series(k, t, cfg);
    return lm_quadrature(k, t, cfg);
}

// ---------------------------------------------------------------------------
// finite-n transform

double ln_exact(long n, double t, const EvalConfig& cfg) {
    if (n < 2) throw DomainError("ln_exact: n must be >= 2");
    // Kahan summation: the Euler-Maclaurin residual being measured downstream
    // sits near 1e-15 at n=256, so plain accumulation noise would show.
    double sum = 0.0, comp = 0.0;
    for (long k = 1; k <= n; ++k) {
        double y = ld(t * static_cast<double>(k) / static_cast<double>(n), cfg) - comp;
        double next = sum + y;
        comp = (next - sum) - y;
        sum = next;
    }
    return sum / static_cast<double>(n) - ld(t / static_cast<double>(n), cfg);
}

double euler_maclaurin_ln(long n, double t, int p, const EvalConfig& cfg) {
    if (n < 2) throw DomainError("euler_maclaurin_ln: n must be >= 2");
    if (p < 1) throw DomainError("euler_maclaurin_ln: p must be >= 1");
    if (t == 0.0) throw DomainError("euler_maclaurin_ln: t must be non-zero");
    const double nn = static_cast<double>(n);
    double delta = t / 12.0 * (ld_deriv(1, t, cfg) - 0.5) / nn;
    const auto& bern = bernoulli_table();
    for (int k = 2; k <= p; ++k) {
        mpz_class fact;
        mpz_fac_ui(fact.get_mpz_t(), 2 * k);
        double coeff = mpq_class(bern[2 * k] / mpq_class(fact)).get_d();
        delta += coeff * std::pow(t / nn, 2 * k - 1) * ld_deriv(2 * k - 1, t, cfg);
    }
    return lm(t, cfg) + h_deriv(0, t, cfg) / nn + t / (2.0 * nn) -
           ld(t / nn, cfg) + delta / nn;
}

}  // namespace permtail::cgf
