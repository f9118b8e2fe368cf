#include "scdma/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "scdma/thresholds.hpp"

namespace scdma {
namespace {

void check_config(const ContinuumConfig& config) {
    if (!config.u_prime) throw std::domain_error("continuum: u_prime is not set");
    if (config.M < 3) throw std::domain_error("continuum: need at least 3 grid points");
    if (!(config.D >= 0.0)) throw std::domain_error("continuum: diffusion coefficient must be >= 0");
    if (!(config.tol > 0.0)) throw std::domain_error("continuum: tolerance must be positive");
    if (config.max_iter < 1) throw std::domain_error("continuum: iteration budget must be positive");
    if (!(config.step_scale > 0.0)) throw std::domain_error("continuum: step_scale must be positive");
}

// next <- cur + step_scale * (-U'(cur) + D * laplacian(cur)); ends pinned.
void update_into(const std::vector<double>& cur, std::vector<double>& next,
                 const ContinuumConfig& config) {
    const int m = config.M;
    const double dh2 = config.D * double(m - 1) * double(m - 1);
    next[0] = config.y_bnd;
    for (int i = 1; i < m - 1; ++i) {
        const double lap = cur[i + 1] - 2.0 * cur[i] + cur[i - 1];
        next[i] = cur[i] + config.step_scale * (-config.u_prime(cur[i]) + dh2 * lap);
    }
    next[m - 1] = config.y_bnd;
}

double stationary_residual(const std::vector<double>& y, const ContinuumConfig& config) {
    const int m = config.M;
    const double dh2 = config.D * double(m - 1) * double(m - 1);
    double r = 0.0;
    for (int i = 1; i < m - 1; ++i) {
        const double lap = y[i + 1] - 2.0 * y[i] + y[i - 1];
        r = std::max(r, std::abs(-config.u_prime(y[i]) + dh2 * lap));
    }
    return r;
}

// Linearized explicit-map bound: the update contracts only if
// step_scale * (U'' + 4 D (M-1)^2) stays below 2 over the visited range.
bool stability_exceeded(const std::vector<double>& y, const ContinuumConfig& config) {
    if (!config.u_second) return false;
    double umax = 0.0;
    for (double v : y) umax = std::max(umax, std::abs(config.u_second(v)));
    const double dh2 = config.D * double(config.M - 1) * double(config.M - 1);
    return config.step_scale * (umax + 4.0 * dh2) >= 2.0;
}

}  // namespace

ContinuumState continuum_step(const ContinuumState& state, const ContinuumConfig& config) {
    check_config(config);
    if (int(state.y.size()) != config.M)
        throw std::domain_error("continuum: state size does not match grid");
    ContinuumState next;
    next.y.resize(config.M);
    update_into(state.y, next.y, config);
    next.iteration = state.iteration + 1;
    return next;
}

ContinuumResult run_to_stationary(const ContinuumConfig& config, const std::vector<double>& initial) {
    check_config(config);
    ContinuumResult out;
    std::vector<double>& y = out.state.y;
    if (initial.empty()) {
        y.assign(config.M, config.y_bnd);
    } else if (int(initial.size()) == config.M) {
        y = initial;
        y.front() = y.back() = config.y_bnd;
    } else {
        throw std::domain_error("continuum: initial field size does not match grid");
    }
    out.stability_warning = stability_exceeded(y, config);

    std::vector<double> next(config.M);
    for (long it = 0; it < config.max_iter; ++it) {
        update_into(y, next, config);
        double delta = 0.0;
        for (int i = 0; i < config.M; ++i) {
            // NaN (a diverged field) must poison the max, not slip past it
            const double d = std::abs(next[i] - y[i]);
            delta = std::max(delta, std::isnan(d) ? std::numeric_limits<double>::infinity() : d);
        }
        y.swap(next);
        out.state.iteration = it + 1;
        if (delta < config.tol) {
            out.converged = true;
            break;
        }
    }
    out.residual = stationary_residual(y, config);
    out.stability_warning = out.stability_warning || stability_exceeded(y, config);
    return out;
}

namespace {

ContinuumConfig family_config(const ContinuumFamily& family, double beta) {
    ContinuumConfig config;
    config.u_prime = family.u_prime_at(beta);
    if (family.u_second_at) config.u_second = family.u_second_at(beta);
    config.D = family.diffusion(beta);
    config.M = family.M;
    config.y_bnd = family.y_boundary(beta);
    config.max_iter = family.max_iter;
    config.tol = family.tol;
    config.step_scale = family.step_scale;
    return config;
}

// Interior seeded in the metastable well; collapse to the boundary value
// within uniform_tol counts as the uniform outcome.
bool uniform_outcome(const ContinuumFamily& family, double beta) {
    ContinuumConfig config = family_config(family, beta);
    std::vector<double> init(config.M, family.y_metastable(beta));
    init.front() = init.back() = config.y_bnd;
    ContinuumResult res = run_to_stationary(config, init);
    double dev = 0.0;
    for (double v : res.state.y) dev = std::max(dev, std::abs(v - config.y_bnd));
    return dev < family.uniform_tol;
}

}  // namespace

double continuum_bp_threshold(const ContinuumFamily& family, double beta_lo, double beta_hi,
                              double tol) {
    if (!family.u_prime_at || !family.y_boundary || !family.y_metastable || !family.diffusion)
        throw std::domain_error("continuum: family is not fully specified");
    if (!(beta_lo < beta_hi)) throw std::domain_error("continuum: empty bracket");
    if (!(tol > 0.0)) throw std::domain_error("continuum: bracket tolerance must be positive");

    const bool lo_uniform = uniform_outcome(family, beta_lo);
    const bool hi_uniform = uniform_outcome(family, beta_hi);
    if (lo_uniform == hi_uniform) {
        std::ostringstream msg;
        msg << "continuum: " << (lo_uniform ? "uniform" : "nonuniform")
            << " outcome at both bracket ends [" << beta_lo << ", " << beta_hi << "]";
        throw std::domain_error(msg.str());
    }
    double lo = beta_lo, hi = beta_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (uniform_outcome(family, mid) == lo_uniform ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ContinuumFamily quartic_double_well_family(double c_diff, int M, double step_scale) {
    if (!(c_diff >= 0.0)) throw std::domain_error("continuum: c_diff must be >= 0");
    // Wells solve y^3 - y + beta = 0; Newton from +-2/sqrt(3) stays in the
    // outer basins for |beta| < 2/(3 sqrt 3).
    auto well = [](double beta, double x0) {
        double y = x0;
        for (int k = 0; k < 100; ++k) {
            const double f = y * y * y - y + beta;
            const double fp = 3.0 * y * y - 1.0;
            const double step = f / fp;
            y -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(y))) break;
        }
        return y;
    };
    ContinuumFamily fam;
    fam.u_prime_at = [](double beta) {
        return std::function<double(double)>(
            [beta](double y) { return y * y * y - y + beta; });
    };
    fam.u_second_at = [](double) {
        return std::function<double(double)>([](double y) { return 3.0 * y * y - 1.0; });
    };
    // beta > 0 tilts the left well down: boundary at the left (global) well,
    // interior seeded at the right (metastable) well.
    fam.y_boundary = [well](double beta) { return well(beta, -2.0 / std::sqrt(3.0)); };
    fam.y_metastable = [well](double beta) { return well(beta, 2.0 / std::sqrt(3.0)); };
    fam.diffusion = [c_diff, M](double) { return c_diff / (double(M - 1) * double(M - 1)); };
    fam.M = M;
    fam.step_scale = step_scale;
    return fam;
}

ContinuumFamily cdma_continuum_family(double sigma2, int L, int W, int M, double step_scale,
                                      const QuadratureSpec& q) {
    if (!(sigma2 > 0.0)) throw std::domain_error("continuum: noise power must be positive");
    const MseInverseTable* tbl = &mse_inverse_table(q);
    auto minima = [sigma2, q](double beta) {
        PotentialProfile prof = potential(beta, sigma2, {0.5}, q);
        std::vector<double> ys;
        for (const StationaryPoint& p : prof.stationary)
            if (p.is_minimum) ys.push_back(p.y);
        if (ys.size() != 2)
            throw std::domain_error("continuum: load is outside the bistable range");
        std::sort(ys.begin(), ys.end());
        return ys;
    };
    ContinuumFamily fam;
    fam.u_prime_at = [tbl, sigma2](double beta) {
        return std::function<double(double)>(
            [tbl, sigma2, beta](double y) { return (*tbl)(y) - sigma2 - beta * y; });
    };
    fam.u_second_at = [tbl](double beta) {
        return std::function<double(double)>([tbl, beta](double y) {
            const double e = 1e-6 * std::max(1.0, std::abs(y));
            return ((*tbl)(y + e) - (*tbl)(y - e)) / (2.0 * e) - beta;
        });
    };
    fam.y_boundary = [minima](double beta) { return minima(beta).front(); };
    fam.y_metastable = [minima](double beta) { return minima(beta).back(); };
    fam.diffusion = [L, W](double beta) { return diffusion_coefficient(beta, W, L); };
    fam.M = M;
    fam.max_iter = 400000;
    fam.step_scale = step_scale;
    return fam;
}

}  // namespace scdma
