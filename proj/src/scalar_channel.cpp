#include "scdma/scalar_channel.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace scdma {
namespace {

struct Rule {
    std::vector<double> x, w;
};

// Gauss-Hermite for weight e^{-t^2}, Newton on the orthonormal recurrence
// (classic gauher scheme), then rescaled to the standard Gaussian measure:
// nodes *= sqrt(2), weights normalized to sum exactly 1.
Rule make_hermite(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(n, 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * r.x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * r.x[1];
        else
            z = 2.0 * z - r.x[i - 2];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        r.x[i] = z;                 // store descending positive roots first
        r.w[i] = 2.0 / (pp * pp);
    }
    // mirror to the negative half (n odd: middle node is the last computed, z=0)
    for (int i = 0; i < n / 2; ++i) {
        r.x[n - 1 - i] = -r.x[i];
        r.w[n - 1 - i] = r.w[i];
    }
    double sum = 0.0;
    for (double w : r.w) sum += w;
    for (int i = 0; i < n; ++i) {
        r.x[i] *= std::numbers::sqrt2;
        r.w[i] /= sum;
    }
    return r;
}

// Gauss-Laguerre for weight e^{-s} on [0, inf) (gaulag with alpha = 0).
Rule make_laguerre(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i == 0)
            z = 3.0 / (1.0 + 2.4 * n);
        else if (i == 1)
            z += 15.0 / (1.0 + 2.5 * n);
        else
            z += ((1.0 + 2.55 * (i - 1)) / (1.9 * (i - 1))) * (z - r.x[i - 2]);
        double pp = 0.0, p2 = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0;
            p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0 - z) * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (p1 - p2) / z;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-14 * std::max(1.0, std::abs(z))) break;
        }
        r.x[i] = z;
        r.w[i] = -1.0 / (pp * n * p2);
    }
    return r;
}

const Rule& hermite_rule(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_hermite(n)).first;
    return it->second;
}

const Rule& laguerre_rule(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_laguerre(n)).first;
    return it->second;
}

int checked_nodes(const QuadratureSpec& q) {
    if (q.node_count < 20)
        throw std::domain_error("QuadratureSpec: node_count must be >= 20");
    return q.node_count;
}

// 1 - tanh(a) without cancellation for large positive a.
double one_minus_tanh(double a) {
    if (a >= 0.0) {
        double e = std::exp(-2.0 * a);
        return 2.0 * e / (1.0 + e);
    }
    return 2.0 / (1.0 + std::exp(2.0 * a));
}

// ln cosh u = |u| + log1p(e^{-2|u|}) - ln 2, overflow-free.
double ln_cosh(double u) {
    double au = std::abs(u);
    return au + std::log1p(std::exp(-2.0 * au)) - std::numbers::ln2;
}

// The Gaussian expectation of 1 - tanh(rho + sqrt(rho) G) concentrates its
// difficult structure at the argument's zero crossing, sqrt(rho) standard
// deviations into the tail; plain Gauss-Hermite loses relative accuracy there
// beyond rho ~ 1.  The equivalent form
//   mmse(rho) = e^{-rho/2} / sqrt(2 pi rho) * INT sech(s) e^{-s^2/(2 rho)} ds
// has an O(1)-scale integrand, which Gauss-Laguerre handles to near machine
// precision, so the evaluation switches representation at RHO_SPLIT.
constexpr double RHO_SPLIT = 0.75;

double bpsk_mmse(double rho, const QuadratureSpec& q) {
    int n = checked_nodes(q);
    if (rho == 0.0) return 1.0;
    double v;
    if (rho <= RHO_SPLIT) {
        const Rule& gh = hermite_rule(n);
        double sq = std::sqrt(rho), acc = 0.0;
        for (int i = 0; i < n; ++i) acc += gh.w[i] * one_minus_tanh(rho + sq * gh.x[i]);
        v = acc;
    } else {
        double lg = -0.5 * rho - 0.5 * std::log(2.0 * std::numbers::pi * rho);
        if (lg < -745.0) return 0.0;  // below double underflow; true value < 1e-323
        const Rule& gl = laguerre_rule(n);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = gl.x[i];
            acc += gl.w[i] * (2.0 / (1.0 + std::exp(-2.0 * s))) * std::exp(-s * s / (2.0 * rho));
        }
        v = std::exp(lg) * 2.0 * acc;
    }
    return std::clamp(v, 0.0, 1.0);
}

// Same split for E[ln cosh(rho + sqrt(rho) G)]: past the split the kink of
// ln cosh is E|u| (closed form for a Gaussian) plus an exponentially small
// correction integrated under the Laguerre weight.
double qpsk_mi(double rho, const QuadratureSpec& q) {
    int n = checked_nodes(q);
    if (rho == 0.0) return 0.0;
    if (rho <= RHO_SPLIT) {
        const Rule& gh = hermite_rule(n);
        double sq = std::sqrt(rho), acc = 0.0;
        for (int i = 0; i < n; ++i) acc += gh.w[i] * ln_cosh(rho + sq * gh.x[i]);
        return std::max(0.0, 2.0 * (rho - acc));
    }
    const Rule& gl = laguerre_rule(n);
    double ap = 0.0, am = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = gl.x[i];
        // ln(log1p(e^{-2s})), switching to its -2s asymptote before underflow
        double l1p = s < 15.0 ? std::log(std::log1p(std::exp(-2.0 * s))) : -2.0 * s;
        double g = -s * s / (2.0 * rho);
        ap += gl.w[i] * std::exp(l1p + 2.0 * s + g);
        am += gl.w[i] * std::exp(l1p + g);
    }
    double t = std::exp(-0.5 * rho) / std::sqrt(2.0 * std::numbers::pi * rho) * (ap + am);
    double v = 2.0 * (rho * std::erfc(std::sqrt(0.5 * rho))
                      - std::sqrt(2.0 * rho / std::numbers::pi) * std::exp(-0.5 * rho)
                      + std::numbers::ln2 - t);
    return std::clamp(v, 0.0, 2.0 * std::numbers::ln2);
}

}  // namespace

double mse_qpsk(NoiseLevel z, const QuadratureSpec& q) {
    if (z.is_infinite()) return 1.0;
    return bpsk_mmse(1.0 / z.value(), q);
}

double mse_inverse(double y, const QuadratureSpec& q) {
    if (!(y > 0.0) || !(y < 1.0))
        throw std::domain_error("mse_inverse: y must lie in (0,1)");
    double lo = 1e-6, hi = 1e6;
    while (bpsk_mmse(1.0 / lo, q) > y && lo > 1e-290) lo *= 0.25;
    while (bpsk_mmse(1.0 / hi, q) < y && hi < 1e290) hi *= 4.0;
    // bisect in log z; ~90 halvings take the bracket ratio to double precision
    for (int it = 0; it < 120 && hi - lo > 1e-16 * lo; ++it) {
        double mid = std::sqrt(lo * hi);
        if (bpsk_mmse(1.0 / mid, q) < y)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

double mutual_info_qpsk(double sir, const QuadratureSpec& q) {
    if (std::isnan(sir) || sir < 0.0)
        throw std::domain_error("mutual_info_qpsk: sir must be >= 0");
    return qpsk_mi(sir, q);
}

double kl_complex_gaussian(double sigma2, double sigma_t2) {
    if (!(sigma2 > 0.0) || !(sigma_t2 > 0.0))
        throw std::domain_error("kl_complex_gaussian: variances must be > 0");
    return std::log(sigma_t2 / sigma2) + sigma2 / sigma_t2 - 1.0;
}

}  // namespace scdma
