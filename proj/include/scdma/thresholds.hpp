#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scdma/coupling.hpp"
#include "scdma/de_core.hpp"

namespace scdma {

// A threshold search over the load beta for a fixed coupling family.
struct ThresholdQuery {
    CouplingSpec family;  // beta field is the free variable, ignored as given
    double sigma2 = 0.1;
    double beta_lo = 0.5;
    double beta_hi = 4.0;
    double tol = 5e-5;        // bisection width target (4-decimal tables)
    double match_tol = 1e-6;  // max_l |xi_l(worst) - xi_l(genie)| for "same solution"
    double de_tol = 1e-10;
    long de_max_iter = 100000;
    QuadratureSpec quad;
};

// Raised when a bisection bracket fails its straddle precondition.
class bracket_error : public std::runtime_error {
public:
    enum class Diagnosis { both_agree, both_disagree };
    bracket_error(Diagnosis d, const std::string& msg)
        : std::runtime_error(msg), diagnosis_(d) {}
    Diagnosis diagnosis() const { return diagnosis_; }

private:
    Diagnosis diagnosis_;
};

// Raised when the requested threshold does not exist because the fixed-point
// equation has a unique solution over the whole bracket (low SNR).
class unique_regime_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Do worst-init and genie-init density evolution land on the same MSE
// profile at this load?
bool solutions_agree(const ThresholdQuery& query, double beta);

// Supremum of beta where the two initializations converge to the same
// solution.  Requires agree(beta_lo) and !agree(beta_hi); the disagreement
// region is an interval, so callers must place beta_hi inside it (see
// scan_agreement).
double bp_threshold(const ThresholdQuery& query);

// Walk up from beta_lo in scan_step increments until the first agree ->
// disagree edge, then bisect inside that cell.  Robust against brackets
// whose upper end lands beyond the disagreement interval.
double bp_threshold_scanned(const ThresholdQuery& query, double scan_step = 0.01);

struct AgreementScan {
    std::vector<double> beta;
    std::vector<bool> agree;
};

// Evaluate solutions_agree on a uniform beta grid over the query bracket.
AgreementScan scan_agreement(const ThresholdQuery& query, double step);

// First agree->disagree edge of a scan, usable as a bp_threshold bracket.
std::optional<std::pair<double, double>> first_disagreement_edge(const AgreementScan& scan);

// Load at which the free energies of the small-MSE and large-MSE branches
// cross (the individually-optimal threshold); the branches come from
// genie/worst initializations.
double io_threshold_uncoupled(double sigma2, double beta_lo = 0.5, double beta_hi = 4.0,
                              double tol = 5e-5, const QuadratureSpec& q = {});

// Same free-energy crossing over a coupled family; an upper bound on the
// coupled IO threshold.
double io_threshold_coupled(const CouplingSpec& family, double sigma2, double beta_lo = 0.5,
                            double beta_hi = 4.0, double tol = 5e-5,
                            const QuadratureSpec& q = {});

struct StationaryPoint {
    double y = 0.0;
    double U = 0.0;
    bool is_minimum = false;
};

// U(y;beta) = int_0^y (xi^-1(u) - sigma2 - beta u) du sampled on a grid,
// with stationary points located and classified.
struct PotentialProfile {
    double beta = 0.0;
    std::vector<double> y;
    std::vector<double> U;
    std::vector<StationaryPoint> stationary;
};

PotentialProfile potential(double beta, double sigma2, const std::vector<double>& y_grid,
                           const QuadratureSpec& q = {});

// Load at which the two minima of U have equal depth: the potential-based
// prediction of the coupled BP threshold.
double potential_threshold(double sigma2, double beta_lo = 0.5, double beta_hi = 4.0,
                           double tol = 5e-5, const QuadratureSpec& q = {});

// D = beta / (2 (W+1)^2 L^2) * sum_{t,l'=0..W} (t-l')^2.
double diffusion_coefficient(double beta, int W, long L);

// Monotone-cubic interpolant of xi^-1 on a log-log grid; near-exact and two
// orders faster than bisection, shared by the potential machinery and the
// continuum drift.  Queries are clamped to the tabulated y-range
// [~1e-12, 1-1e-7].
class MseInverseTable {
public:
    explicit MseInverseTable(const QuadratureSpec& q, int nodes = 4096);
    double operator()(double y) const;
    double y_min() const { return y_min_; }
    double y_max() const { return y_max_; }

private:
    std::vector<double> ly_, lz_, d_;  // log y nodes, log z values, dlz/dly
    double y_min_ = 0.0, y_max_ = 0.0;
};

// Process-wide read-only table cache keyed by node_count.
const MseInverseTable& mse_inverse_table(const QuadratureSpec& q);

nlohmann::json threshold_to_json(const std::string& kind, const CouplingSpec& family,
                                 double snr_db, double threshold, double tolerance);

}  // namespace scdma
