#include "permtail/exact.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "permtail/sldp.hpp"

namespace permtail::exact {

namespace {

mpz_class factorial_z(long n) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
    return f;
}

}  // namespace

mpq_class CountDistribution::mean() const {
    mpz_class acc = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        acc += mpz_class(static_cast<long>(k)) * counts[k];
    mpq_class m(acc, total);
    m.canonicalize();
    return m;
}

mpq_class CountDistribution::variance() const {
    mpz_class acc = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        acc += mpz_class(static_cast<long>(k)) * mpz_class(static_cast<long>(k)) *
               counts[k];
    mpq_class second(acc, total);
    second.canonicalize();
    mpq_class mu = mean();
    return second - mu * mu;
}

mpq_class CountDistribution::central_moment(int r) const {
    mpq_class mu = mean();
    mpq_class acc = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        mpq_class d = mpq_class(static_cast<long>(k)) - mu;
        mpq_class p = 1;
        for (int i = 0; i < r; ++i) p *= d;
        acc += p * mpq_class(counts[k]);
    }
    acc /= mpq_class(total);
    acc.canonicalize();
    return acc;
}

CountDistribution eulerian(long n, const SizeCaps& caps) {
    if (n < 2) throw DomainError("eulerian: n must be >= 2");
    if (n > caps.eulerian) throw SizeError("eulerian: n exceeds cap");
    std::vector<mpz_class> row{1};
    std::vector<mpz_class> next;
    for (long m = 2; m <= n; ++m) {
        next.assign(m, 0);
        for (long k = 0; k < m; ++k) {
            mpz_class v = 0;
            if (k < static_cast<long>(row.size()))
                v += mpz_class(k + 1) * row[k];
            if (k >= 1) v += mpz_class(m - k) * row[k - 1];
            next[k] = v;
        }
        row.swap(next);
    }
    CountDistribution dist;
    dist.statistic = Statistic::Descents;
    dist.n = n;
    dist.counts = std::move(row);
    dist.total = factorial_z(n);
    return dist;
}

CountDistribution mahonian(long n, const SizeCaps& caps) {
    if (n < 2) throw DomainError("mahonian: n must be >= 2");
    if (n > caps.mahonian) throw SizeError("mahonian: n exceeds cap");
    std::vector<mpz_class> row{1};
    for (long k = 2; k <= n; ++k) {
        const long old_len = static_cast<long>(row.size());
        const long new_len = old_len + k - 1;
        // in-place prefix sums, then new[i] = P[min(i, old-1)] - P[i-k]
        for (long i = 1; i < old_len; ++i) row[i] += row[i - 1];
        row.resize(new_len);
        for (long i = new_len - 1; i >= 0; --i) {
            if (i >= old_len) row[i] = row[old_len - 1];
            if (i >= k) row[i] -= row[i - k];
        }
    }
    CountDistribution dist;
    dist.statistic = Statistic::MajorIndex;
    dist.n = n;
    dist.counts = std::move(row);
    dist.total = factorial_z(n);
    return dist;
}

double log_mpz(const mpz_class& z) {
    if (z <= 0) throw DomainError("log_mpz: argument must be positive");
    signed long exponent = 0;
    double mantissa = mpz_get_d_2exp(&exponent, z.get_mpz_t());
    return std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
}

ExactTail tail(const CountDistribution& dist, double x) {
    const bool descents = dist.statistic == Statistic::Descents;
    if (descents) {
        if (!(x > 0.0 && x < 1.0))
            throw DomainError("tail: x must lie in (0,1) for descents");
    } else {
        if (!(x > 0.0 && x <= 0.5))
            throw DomainError("tail: x must lie in (0,1/2] for the major index");
    }
    const double scale = descents ? static_cast<double>(dist.n)
                                  : static_cast<double>(dist.n) *
                                        static_cast<double>(dist.n);
    ExactTail out;
    out.threshold = sldp::snapped_ceil(scale * x);
    if (out.threshold > dist.max_value()) {
        out.empty = true;
        out.log_value = -std::numeric_limits<double>::infinity();
        return out;
    }
    mpz_class num = 0;
    for (long k = std::max(0LL, static_cast<long long>(out.threshold));
         k <= dist.max_value(); ++k)
        num += dist.counts[k];
    out.numerator = num;
    out.log_value = log_mpz(num) - log_mpz(dist.total);
    return out;
}

ExactTail tail(Statistic st, long n, double x, const SizeCaps& caps) {
    return tail(st == Statistic::Descents ? eulerian(n, caps) : mahonian(n, caps),
                x);
}

double irwin_hall_tail(int n, long long m) {
    if (n < 1) throw DomainError("irwin_hall_tail: n must be >= 1");
    if (n > 15) throw SizeError("irwin_hall_tail: n exceeds the double-precision cap 15");
    if (m <= 0) return 1.0;
    if (m >= n) return 0.0;
    // P(S_n >= m) = P(S_n <= n - m) by symmetry; alternating CDF sum
    const long long y = n - m;
    double acc = 0.0;
    double binom = 1.0;
    for (long long j = 0; j <= y; ++j) {
        double term = binom * std::pow(static_cast<double>(y - j), n);
        acc += (j % 2 == 0) ? term : -term;
        binom *= static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    return acc / fact;
}

// ---------------------------------------------------------------------------
// characteristic-function inversion

namespace {

// e^{t+iv} - 1 without cancellation near v = 0 mod 2pi
std::complex<double> cexpm1(double t, double v) {
    const double c = std::cos(v);
    const double s = std::sin(v);
    const double em1 = std::expm1(t);
    const double half = std::sin(0.5 * v);
    return {em1 * c - 2.0 * half * half, (em1 + 1.0) * s};
}

void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> w =
                    std::polar(1.0, angle * static_cast<double>(j));
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

}  // namespace

FourierPmf pmf_via_fourier(long n, double tilt, const SizeCaps& caps) {
    if (n < 2) throw DomainError("pmf_via_fourier: n must be >= 2");
    if (n > caps.mahonian) throw SizeError("pmf_via_fourier: n exceeds cap");

    const long support = n * (n - 1) / 2;
    std::size_t length = 1;
    while (length < static_cast<std::size_t>(support) + 1) length <<= 1;

    // samples of the tilted characteristic function
    //   Phi(v) = prod_{k=2}^{n} [ (e^{(t+iv)k}-1) / (e^{tk}-1) ]
    //                           [ (e^{t}-1)      / (e^{t+iv}-1) ]
    // (the k-th factor is E[e^{(t+iv)V_k}] / E[e^{tV_k}]); |Phi| <= 1
    std::vector<std::complex<double>> samples(length);
    const double t = tilt;
    for (std::size_t j = 0; j < length; ++j) {
        const double v = 2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(length);
        if (j == 0) {
            samples[j] = 1.0;
            continue;
        }
        std::complex<double> phi = 1.0;
        const std::complex<double> base = cexpm1(t, v);
        const double base_t = std::expm1(t);
        for (long k = 2; k <= n; ++k) {
            const std::complex<double> num = cexpm1(t * k, v * k);
            if (t != 0.0)
                phi *= (num / base) * (base_t / std::expm1(t * k));
            else
                phi *= num / (static_cast<double>(k) * base);
        }
        samples[j] = phi;
    }

    fft_inplace(samples);

    FourierPmf out;
    out.tilt = tilt;
    out.probabilities.assign(support + 1, 0.0);
    // log E[e^{t Sigma_n}] = sum_k L_D(tk) - n L_D(t), needed to undo the tilt
    double log_mgf = 0.0;
    if (t != 0.0) {
        for (long k = 1; k <= n; ++k) log_mgf += cgf::ld(t * k);
        log_mgf -= static_cast<double>(n) * cgf::ld(t);
    }
    for (long k = 0; k <= support; ++k) {
        const double q = samples[k].real() / static_cast<double>(length);
        out.max_negative_mass = std::min(out.max_negative_mass, q);
        if (t == 0.0) {
            out.probabilities[k] = q;
        } else {
            out.probabilities[k] =
                q > 0.0 ? std::exp(std::log(q) + log_mgf - t * k) : 0.0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// row cache

namespace {

constexpr char kMagic[4] = {'P', 'T', 'C', 'D'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

bool get_u32(std::istream& is, std::uint32_t& v) {
    v = 0;
    for (int i = 0; i < 4; ++i) {
        int c = is.get();
        if (c == EOF) return false;
        v |= static_cast<std::uint32_t>(c & 0xff) << (8 * i);
    }
    return true;
}

bool get_u64(std::istream& is, std::uint64_t& v) {
    v = 0;
    for (int i = 0; i < 8; ++i) {
        int c = is.get();
        if (c == EOF) return false;
        v |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
    }
    return true;
}

}  // namespace

std::filesystem::path cache_file(const std::filesystem::path& dir, Statistic st,
                                 long n) {
    return dir / (std::string(saddle::name(st)) + "_" + std::to_string(n) + ".ptcd");
}

void store_cached(const CountDistribution& dist, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream os(cache_file(dir, dist.statistic, dist.n),
                     std::ios::binary | std::ios::trunc);
    if (!os) return;  // cache is best-effort
    os.write(kMagic, 4);
    os.put(static_cast<char>(kVersion));
    os.put(dist.statistic == Statistic::Descents ? 0 : 1);
    put_u32(os, static_cast<std::uint32_t>(dist.n));
    put_u64(os, dist.counts.size());
    std::vector<unsigned char> buf;
    for (const mpz_class& c : dist.counts) {
        const std::size_t bytes = (mpz_sizeinbase(c.get_mpz_t(), 2) + 7) / 8;
        buf.resize(std::max<std::size_t>(bytes, 1));
        std::size_t written = 0;
        mpz_export(buf.data(), &written, -1, 1, -1, 0, c.get_mpz_t());
        put_u32(os, static_cast<std::uint32_t>(written));
        os.write(reinterpret_cast<const char*>(buf.data()),
                 static_cast<std::streamsize>(written));
    }
}

std::optional<CountDistribution> load_cached(Statistic st, long n,
                                             const std::filesystem::path& dir) {
    std::ifstream is(cache_file(dir, st, n), std::ios::binary);
    if (!is) return std::nullopt;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) return std::nullopt;
    if (is.get() != kVersion) return std::nullopt;
    const int tag = is.get();
    if (tag != (st == Statistic::Descents ? 0 : 1)) return std::nullopt;
    std::uint32_t stored_n = 0;
    if (!get_u32(is, stored_n) || static_cast<long>(stored_n) != n)
        return std::nullopt;
    std::uint64_t count = 0;
    if (!get_u64(is, count)) return std::nullopt;

    CountDistribution dist;
    dist.statistic = st;
    dist.n = n;
    dist.counts.resize(count);
    std::vector<unsigned char> buf;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t len = 0;
        if (!get_u32(is, len)) return std::nullopt;
        if (len == 0) continue;  // value stays zero
        buf.resize(len);
        is.read(reinterpret_cast<char*>(buf.data()), len);
        if (!is) return std::nullopt;
        mpz_import(dist.counts[i].get_mpz_t(), len, -1, 1, -1, 0, buf.data());
    }
    dist.total = factorial_z(n);
    return dist;
}

CountDistribution row(Statistic st, long n,
                      const std::optional<std::filesystem::path>& cache_dir,
                      const SizeCaps& caps) {
    if (cache_dir) {
        if (auto cached = load_cached(st, n, *cache_dir)) return *std::move(cached);
    }
    CountDistribution dist =
        st == Statistic::Descents ? eulerian(n, caps) : mahonian(n, caps);
    if (cache_dir) store_cached(dist, *cache_dir);
    return dist;
}

}  // namespace permtail::exact
