#pragma once

#include <functional>
#include <vector>

#include "scdma/scalar_channel.hpp"

namespace scdma {

// Discrete-time gradient-plus-diffusion dynamics for a scalar field on [0,1]
// with pinned (Dirichlet) boundaries:
//   y <- y + step_scale * (-U'(y) + D * lap(y))
// step_scale = 1 is the literal map; it diverges whenever U'' + 4D(M-1)^2
// exceeds 2 at a well (the CDMA potential and the quartic double-well both
// do), so stiff potentials need a smaller relaxation factor.  Stationary
// solutions do not depend on step_scale.
struct ContinuumConfig {
    std::function<double(double)> u_prime;        // U'(.; beta) at the configured load
    std::function<double(double)> u_second;       // optional, for the stability guard
    double D = 1e-4;
    int M = 257;          // grid points over [0,1]
    double y_bnd = 0.0;   // Dirichlet value at both ends
    long max_iter = 200000;
    double tol = 1e-10;   // on the max field update
    double step_scale = 1.0;
};

struct ContinuumState {
    std::vector<double> y;
    long iteration = 0;
};

// One explicit update; boundary samples re-pinned afterwards.
ContinuumState continuum_step(const ContinuumState& state, const ContinuumConfig& config);

struct ContinuumResult {
    ContinuumState state;
    bool converged = false;
    double residual = 0.0;      // max |-U'(y) + D lap(y)| over interior points
    bool stability_warning = false;  // step_scale * (max U'' + 4 D (M-1)^2) >= 2
};

// Iterate to stationarity.  `initial` must hold M samples (its ends are
// re-pinned to y_bnd); when empty, a uniform field at the boundary value is
// used.
ContinuumResult run_to_stationary(const ContinuumConfig& config,
                                  const std::vector<double>& initial = {});

// A beta-indexed family for threshold bisection: the drift, the boundary
// (good-well) value, and the metastable-well value the interior starts from.
struct ContinuumFamily {
    std::function<std::function<double(double)>(double beta)> u_prime_at;
    std::function<std::function<double(double)>(double beta)> u_second_at;  // optional
    std::function<double(double beta)> y_boundary;
    std::function<double(double beta)> y_metastable;
    std::function<double(double beta)> diffusion;  // D may depend on beta
    int M = 129;
    long max_iter = 400000;
    double tol = 1e-10;
    double step_scale = 1.0;
    double uniform_tol = 0.05;  // max |y - y_bnd| below this = uniform outcome
};

// Supremum of beta at which the field collapses to the uniform boundary
// solution; bisection between uniform and nonuniform outcomes.
double continuum_bp_threshold(const ContinuumFamily& family, double beta_lo, double beta_hi,
                              double tol);

// U(y;beta) = y^4/4 - y^2/2 + beta*y; equal well depth at exactly beta = 0.
ContinuumFamily quartic_double_well_family(double c_diff = 2.0, int M = 129,
                                           double step_scale = 0.13);

// The CDMA effective potential at the given noise power, with D taken from
// the (L, W) discrete system.  Valid in the bistable load range.
ContinuumFamily cdma_continuum_family(double sigma2, int L, int W, int M = 65,
                                      double step_scale = 0.25,
                                      const QuadratureSpec& q = {});

}  // namespace scdma
