#include "scdma/de_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace scdma {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sum_t h2[t][l] sigma_t2[t] for one column l; infinity dominates but only
// through positive weights (0 * inf must not poison the sum).
double column_variance(const std::vector<double>& s, const CouplingSystem& sys, int l) {
    const int L = sys.L();
    double acc = 0.0;
    for (int t = 0; t < L; ++t) {
        double w = sys.h2(t, l);
        if (w > 0.0) {
            if (std::isinf(s[t])) return kInf;
            acc += w * s[t];
        }
    }
    return acc;
}

void check_length(const DEState& state, const CouplingSystem& system) {
    if (state.sigma_t2.size() != static_cast<std::size_t>(system.L()))
        throw std::domain_error("DEState length does not match system L");
}

}  // namespace

std::vector<double> sir_profile(const DEState& state, const CouplingSystem& system) {
    check_length(state, system);
    const int L = system.L();
    std::vector<double> sir(L);
    for (int l = 0; l < L; ++l) {
        double v = column_variance(state.sigma_t2, system, l);
        sir[l] = std::isinf(v) ? 0.0 : 1.0 / v;
    }
    return sir;
}

DEState de_step(const DEState& state, const CouplingSystem& system, const QuadratureSpec& q) {
    check_length(state, system);
    const int L = system.L();
    std::vector<double> xi(L);
    for (int l = 0; l < L; ++l) {
        double v = column_variance(state.sigma_t2, system, l);
        // v = 0 happens only at the genie start; xi(0+) = 0
        xi[l] = std::isinf(v) ? 1.0 : (v == 0.0 ? 0.0 : mse_qpsk(NoiseLevel(v), q));
    }
    DEState next;
    next.sigma_t2.resize(L);
    next.iteration = state.iteration + 1;
    for (int t = 0; t < L; ++t) {
        double acc = 0.0;
        for (int l = 0; l < L; ++l) acc += system.h2(t, l) * xi[l];
        next.sigma_t2[t] = system.sigma2() + system.loads()[t] * acc;
    }
    return next;
}

DEState initial_state(const InitMode& init, const CouplingSystem& system) {
    const auto L = static_cast<std::size_t>(system.L());
    DEState s;
    switch (init.kind) {
        case InitMode::Kind::worst:
            s.sigma_t2.assign(L, kInf);
            break;
        case InitMode::Kind::genie:
            // sigma_init^2 = 0: one step gives exactly sigma2 (xi(0+) = 0),
            // so start from the zero vector's image directly
            s.sigma_t2.assign(L, 0.0);
            break;
        case InitMode::Kind::custom:
            if (init.custom.size() != L)
                throw std::domain_error("custom init length does not match system L");
            for (double v : init.custom)
                if (std::isnan(v) || v < 0.0)
                    throw std::domain_error("custom init entries must be >= 0 or infinite");
            s.sigma_t2 = init.custom;
            break;
    }
    return s;
}

DESolution de_solve(const CouplingSystem& system, const InitMode& init, double tol,
                    long max_iter, const QuadratureSpec& q) {
    if (!(tol > 0.0)) throw std::domain_error("de_solve: tol must be > 0");
    if (max_iter < 1) throw std::domain_error("de_solve: max_iter must be >= 1");
    DEState state = initial_state(init, system);
    double residual = kInf;
    for (long i = 0; i < max_iter; ++i) {
        DEState next = de_step(state, system, q);
        residual = 0.0;
        for (std::size_t t = 0; t < next.sigma_t2.size(); ++t) {
            double d = std::abs(next.sigma_t2[t] - state.sigma_t2[t]);
            residual = std::max(residual, std::isnan(d) ? kInf : d);
        }
        state = std::move(next);
        if (residual < tol) break;
    }
    DESolution sol;
    sol.state = std::move(state);
    sol.converged = residual < tol;
    sol.residual = residual;
    sol.sir.resize(system.L());
    sol.mse.resize(system.L());
    DEState& st = sol.state;
    for (int l = 0; l < system.L(); ++l) {
        double v = column_variance(st.sigma_t2, system, l);
        sol.sir[l] = std::isinf(v) ? 0.0 : 1.0 / v;
        sol.mse[l] = std::isinf(v) ? 1.0 : mse_qpsk(NoiseLevel(v), q);
    }
    sol.free_energy = sol.converged ? free_energy(sol, system, q)
                                    : std::numeric_limits<double>::quiet_NaN();
    return sol;
}

double free_energy(const DESolution& solution, const CouplingSystem& system,
                   const QuadratureSpec& q) {
    if (!solution.converged)
        throw std::domain_error("free_energy: defined only at converged fixed points");
    check_length(solution.state, system);
    const int L = system.L();
    double info = 0.0;
    for (int l = 0; l < L; ++l) info += mutual_info_qpsk(solution.sir[l], q);
    double kl = 0.0;
    for (int t = 0; t < L; ++t) {
        double beta_t = system.loads()[t];
        if (beta_t > 0.0)
            kl += kl_complex_gaussian(system.sigma2(), solution.state.sigma_t2[t]) / beta_t;
    }
    return (info + kl) / L;
}

Selection select_solution(const std::vector<DESolution>& candidates) {
    if (candidates.empty()) throw std::domain_error("select_solution: empty candidate list");
    for (const auto& c : candidates)
        if (!c.converged)
            throw std::domain_error("select_solution: all candidates must be converged");
    auto mean_mse = [](const DESolution& s) {
        return std::accumulate(s.mse.begin(), s.mse.end(), 0.0) / s.mse.size();
    };
    Selection sel;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        double df = candidates[i].free_energy - candidates[sel.index].free_energy;
        if (std::abs(df) <= 1e-9) {
            sel.tie = true;
            if (mean_mse(candidates[i]) < mean_mse(candidates[sel.index])) sel.index = i;
        } else if (df < 0.0) {
            sel.index = i;
        }
    }
    return sel;
}

nlohmann::json solution_to_json(const DESolution& solution) {
    nlohmann::json j;
    j["sigma_t2"] = solution.state.sigma_t2;
    j["iterations"] = solution.state.iteration;
    j["sir"] = solution.sir;
    j["mse"] = solution.mse;
    if (solution.converged)
        j["free_energy"] = solution.free_energy;
    else
        j["free_energy"] = nullptr;
    j["converged"] = solution.converged;
    j["residual"] = solution.residual;
    return j;
}

}  // namespace scdma
