#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "scdma/coupling.hpp"
#include "scdma/scalar_channel.hpp"

namespace scdma {

// Effective noise variances per symbol period at one iteration.  Entries may
// be +infinity (worst-case start); after one step they fall into
// [sigma2, sigma2 + beta_t].
struct DEState {
    std::vector<double> sigma_t2;
    long iteration = 0;
};

struct InitMode {
    enum class Kind { worst, genie, custom };
    Kind kind = Kind::worst;
    std::vector<double> custom;  // used only for Kind::custom

    static InitMode worst() { return {Kind::worst, {}}; }
    static InitMode genie() { return {Kind::genie, {}}; }
    static InitMode custom_init(std::vector<double> v) { return {Kind::custom, std::move(v)}; }
};

struct DESolution {
    DEState state;
    std::vector<double> sir;  // sir_l = (sum_t h2[t][l] sigma_t^2)^-1
    std::vector<double> mse;  // xi_l = xi(1/sir_l)
    double free_energy = 0.0;
    bool converged = false;
    double residual = 0.0;  // final max-update magnitude
};

// sir_l = (sum_t h2[t][l] sigma_t2[t])^-1; 0 where an infinite variance
// contributes with positive weight.
std::vector<double> sir_profile(const DEState& state, const CouplingSystem& system);

// One sweep of the coupled variance recursion:
// sigma_t2' = sigma2 + beta_t * sum_l h2[t][l] * xi(sum_t' h2[t'][l] sigma_t'2).
DEState de_step(const DEState& state, const CouplingSystem& system,
                const QuadratureSpec& q = {});

DEState initial_state(const InitMode& init, const CouplingSystem& system);

// Iterate de_step until the max variance update drops below tol (or max_iter
// sweeps).  Free energy is attached only when converged.
DESolution de_solve(const CouplingSystem& system, const InitMode& init, double tol = 1e-10,
                    long max_iter = 100000, const QuadratureSpec& q = {});

// F = (1/L) sum_l I(sir_l) + (1/L) sum_t beta_t^-1 KL(sigma2 || sigma_t2),
// in nats; the beta_t = 0 terms are 0.  Defined at fixed points only.
double free_energy(const DESolution& solution, const CouplingSystem& system,
                   const QuadratureSpec& q = {});

struct Selection {
    std::size_t index = 0;
    bool tie = false;  // free energies within 1e-9 nats; smaller mean MSE picked
};

// Pick the free-energy-minimizing candidate among converged solutions.
Selection select_solution(const std::vector<DESolution>& candidates);

nlohmann::json solution_to_json(const DESolution& solution);

}  // namespace scdma
