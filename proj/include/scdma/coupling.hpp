#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace scdma {

enum class CouplingKind { uncoupled, circular };

// Family parameters with the load left as the experiment's control knob.
struct CouplingSpec {
    CouplingKind kind = CouplingKind::circular;
    int L = 1;
    int W = 0;           // coupling window; ignored for uncoupled
    double beta = 1.0;   // communication-phase load
    double beta_init = 0.0;
};

// L x L squared coupling magnitudes |h_{t,l}|^2 plus per-period loads and the
// channel noise power.  Immutable after construction.
class CouplingSystem {
public:
    CouplingSystem(int L, std::vector<double> h2, std::vector<double> loads, double sigma2);

    int L() const { return L_; }
    double h2(int t, int l) const { return h2_[static_cast<std::size_t>(t) * L_ + l]; }
    const std::vector<double>& h2_flat() const { return h2_; }
    const std::vector<double>& loads() const { return loads_; }
    double sigma2() const { return sigma2_; }

private:
    int L_;
    std::vector<double> h2_;  // row-major
    std::vector<double> loads_;
    double sigma2_;
};

// h2 = identity, uniform loads.
CouplingSystem build_uncoupled(int L, double beta, double sigma2);

// Banded circulant: h2[t][l] = 1/(W+1) when (t-l) mod L in {0..W}; loads are
// beta_init on the first W periods (the initialization phase), beta after.
CouplingSystem build_circular(int L, int W, double beta, double beta_init, double sigma2);

CouplingSystem build_system(const CouplingSpec& spec, double sigma2);

struct ValidationReport {
    bool ok = true;
    std::string detail;  // first violated row/column and residual
};

// Checks nonnegativity and that every row and column of h2 sums to 1
// within 1e-12.
ValidationReport validate(const CouplingSystem& system);

struct SumRate {
    double rate = 0.0;
    // beta_init = 0 with W > 0 spreads the initialization phase infinitely
    // thinly; the rate degenerates to 0 and this flag is raised.
    bool infinite_init_spreading = false;
};

// R = 2 / (beta_init^-1 (W/L) + beta^-1 (1 - W/L)), QPSK information units
// per chip.
SumRate sum_rate(double beta, double beta_init, int W, long L);

// JSON document {L, W, kind, beta, beta_init, sigma2_db} used by the CLI.
nlohmann::json spec_to_json(const CouplingSpec& spec, double sigma2_db);
std::pair<CouplingSpec, double> spec_from_json(const nlohmann::json& j);  // returns (spec, sigma2)

double sigma2_from_snr_db(double snr_db);

}  // namespace scdma
