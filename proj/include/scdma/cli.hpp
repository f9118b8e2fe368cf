#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace scdma::cli {

// Everything a run needs; mirrored one-to-one by the --config JSON document,
// with command-line flags overriding file values.
struct RunConfig {
    std::string command;

    // system under study
    double snr_db = 10.0;
    int L = 1;
    int W = 0;
    double beta = std::numeric_limits<double>::quiet_NaN();  // NaN = per-command default/required
    double beta_init = 0.0;
    std::string kind = "circular";  // circular | uncoupled
    std::string init = "both";      // de: worst | genie | both

    // grids and sweeps
    double z = 0.0;  // xi: single evaluation point when > 0
    double z_min = 1e-3;
    double z_max = 1e3;
    int points = 61;
    double y_min = 1e-4;
    double y_max = 0.999;
    double beta_lo = 0.5;
    double beta_hi = 4.0;
    double beta_step = 0.05;  // sumrate sweep

    // solver knobs
    int nodes = 63;
    double de_tol = 1e-10;
    long de_max_iter = 100000;
    double tol = 5e-5;        // threshold bisection width
    double match_tol = 1e-6;  // profile-agreement tolerance
    double scan_step = 0.01;  // bracket-narrowing scan
    std::string threshold_kind = "bp";  // bp | io | potential

    // continuum
    std::string model = "quartic";  // quartic | cdma
    int M = 0;                      // 0 = per-model default
    double D = -1.0;                // < 0 = per-model default
    double step_scale = 0.0;        // 0 = per-model default
    long max_iter = 400000;
    double cont_tol = 1e-10;
    int snapshots = 8;
    bool cont_threshold = false;  // continuum: bisect instead of one profile run
    double uniform_tol = 0.05;

    // tables
    int table = 1;
    std::vector<double> snr_list;
    std::vector<int> L_list;
    std::vector<int> W_list;

    // output
    std::string output;  // empty = stream passed to run()
    std::string format = "csv";
    int workers = 1;
};

// Full command-line entry point, in-process testable.  argv[0] is the
// program name.  Returns the process exit code: 0 success, 1 usage or
// domain error, 2 I/O error, 3 non-convergence in a requested solve.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scdma::cli
