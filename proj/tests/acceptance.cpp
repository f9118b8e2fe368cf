// End-to-end acceptance runs for the solver: reference thresholds at 9-14 dB,
// the coupled threshold grid, the equal-depth prediction, fixed-point profile
// shapes around threshold, and structural invariants.  Each criterion prints
// one PASS/FAIL line with the measured values; exit code 0 only if all pass.
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scdma/continuum.hpp"
#include "scdma/coupling.hpp"
#include "scdma/de_core.hpp"
#include "scdma/scalar_channel.hpp"
#include "scdma/thresholds.hpp"

using namespace scdma;

namespace {

struct Criterion {
    bool ok = true;
    std::ostringstream detail;

    void value(const std::string& label, double got, double want, double tol) {
        bool pass = std::abs(got - want) <= tol;
        ok = ok && pass;
        detail << label << "=" << got;
        if (!pass) {
            detail.precision(10);
            detail << " [want " << want << " +-" << tol << "]";
        }
        detail << " ";
    }
    void flag(const std::string& label, bool pass) {
        ok = ok && pass;
        detail << label << (pass ? " " : " FAILED ");
    }
};

int g_failures = 0;

void report(const char* cid, const char* title, const Criterion& c) {
    std::printf("%s: %s (%s) %s\n", c.ok ? "PASS" : "FAIL", cid, title, c.detail.str().c_str());
    std::fflush(stdout);
    if (!c.ok) ++g_failures;
}

constexpr double kBpTol = 1e-3;
constexpr double kPredTol = 2e-3;
constexpr double kIoTol = 2e-3;
constexpr double kIoCoupledTol = 5e-3;

const CouplingSpec kUncoupled{CouplingKind::uncoupled, 1, 0, 1.0, 0.0};
const CouplingSpec kCoupled32{CouplingKind::circular, 32, 1, 1.0, 0.0};

ThresholdQuery bp_query(double snr_db, const CouplingSpec& family) {
    ThresholdQuery q;
    q.family = family;
    q.sigma2 = sigma2_from_snr_db(snr_db);
    q.beta_lo = 1.5;
    q.beta_hi = 2.6;
    q.de_max_iter = 300000;  // near-threshold coupled runs slow down critically
    return q;
}

const std::vector<double> kSnrs{9.0, 10.0, 12.0, 14.0};

void c1_single_period_bp() {
    Criterion c;
    const double want[] = {1.6147, 1.7307, 1.8734, 1.9552};
    for (std::size_t i = 0; i < kSnrs.size(); ++i) {
        double x = bp_threshold_scanned(bp_query(kSnrs[i], kUncoupled), 0.01);
        std::ostringstream label;
        label << kSnrs[i] << "dB";
        c.value(label.str(), x, want[i], kBpTol);
    }
    report("c1", "single-period recovery thresholds", c);
}

void c2_coupled_grid() {
    Criterion c;
    const int Ls[] = {16, 32, 64};
    const double want[3][5] = {{1.7307, 1.8123, 1.8241, 1.8684, 1.9455},
                               {1.7307, 1.8120, 1.8121, 1.8130, 1.8179},
                               {1.7307, 1.8120, 1.8121, 1.8121, 1.8121}};
    for (int i = 0; i < 3; ++i)
        for (int W = 0; W <= 4; ++W) {
            CouplingSpec fam{CouplingKind::circular, Ls[i], W, 1.0, 0.0};
            double x = bp_threshold_scanned(bp_query(10.0, fam), 0.01);
            std::ostringstream label;
            label << "L" << Ls[i] << "W" << W;
            c.value(label.str(), x, want[i][W], kBpTol);
        }
    report("c2", "coupled threshold grid at 10 dB", c);
}

void c3_prediction_vs_numeric() {
    Criterion c;
    const double want_pred[] = {1.6550, 1.8121, 2.0039, 2.1132};
    const double want_num[] = {1.6550, 1.8120, 2.0030, 2.1109};
    for (std::size_t i = 0; i < kSnrs.size(); ++i) {
        double sigma2 = sigma2_from_snr_db(kSnrs[i]);
        double pred = potential_threshold(sigma2, 1.5, 3.2, 5e-5);
        double num = bp_threshold_scanned(bp_query(kSnrs[i], kCoupled32), 0.01);
        std::ostringstream pl, nl;
        pl << "pred" << kSnrs[i];
        nl << "num" << kSnrs[i];
        c.value(pl.str(), pred, want_pred[i], kPredTol);
        c.value(nl.str(), num, want_num[i], kBpTol);
        if (kSnrs[i] < 11.0) {  // the prediction is tightest at moderate SNR
            std::ostringstream gl;
            gl << "|pred-num|" << kSnrs[i];
            c.value(gl.str(), std::abs(pred - num), 0.0, 1e-3);
        }
    }
    report("c3", "equal-depth prediction vs coupled thresholds", c);
}

void c4_io_thresholds() {
    Criterion c;
    const double want_unc[] = {1.6992, 1.9826, 2.5071, 2.9855};
    const double want_cpl[] = {1.7048, 1.9873, 2.4973, 2.9584};
    for (std::size_t i = 0; i < kSnrs.size(); ++i) {
        double sigma2 = sigma2_from_snr_db(kSnrs[i]);
        double unc = io_threshold_uncoupled(sigma2, 1.5, 3.2, 5e-5);
        double cpl = io_threshold_coupled(kCoupled32, sigma2, 1.5, 3.2, 5e-5);
        std::ostringstream ul, cl;
        ul << "unc" << kSnrs[i];
        cl << "cpl" << kSnrs[i];
        c.value(ul.str(), unc, want_unc[i], kIoTol);
        c.value(cl.str(), cpl, want_cpl[i], kIoCoupledTol);
    }
    report("c4", "optimal-detection thresholds, single and coupled", c);
}

void c5_profiles_around_threshold() {
    Criterion c;
    const double sigma2 = sigma2_from_snr_db(9.0);
    auto pair_at = [&](double beta) {
        CouplingSystem sys =
            build_system({CouplingKind::circular, 32, 1, beta, 1.22}, sigma2);
        DESolution w = de_solve(sys, InitMode::worst(), 1e-10, 300000);
        DESolution g = de_solve(sys, InitMode::genie(), 1e-10, 300000);
        return std::make_pair(w, g);
    };
    auto minmax = [](const std::vector<double>& v) {
        auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return std::make_pair(*lo, *hi);
    };

    auto [w_lo, g_lo] = pair_at(1.6550);
    double gap_lo = 0.0;
    for (int l = 0; l < 32; ++l) gap_lo = std::max(gap_lo, std::abs(w_lo.mse[l] - g_lo.mse[l]));
    auto [wmin_lo, wmax_lo] = minmax(w_lo.mse);
    c.flag("below:converged", w_lo.converged && g_lo.converged);
    c.flag("below:agree", gap_lo < 1e-6);
    c.value("below:max_mse", wmax_lo, 0.0, 0.05);
    (void)wmin_lo;

    auto [w_hi, g_hi] = pair_at(1.70);
    double gap_hi = 0.0;
    for (int l = 0; l < 32; ++l) gap_hi = std::max(gap_hi, std::abs(w_hi.mse[l] - g_hi.mse[l]));
    auto [wmin_hi, wmax_hi] = minmax(w_hi.mse);
    auto [gmin_hi, gmax_hi] = minmax(g_hi.mse);
    (void)gmin_hi;
    c.flag("above:split", gap_hi > 1e-6);
    c.flag("above:inhomogeneous", wmax_hi - wmin_hi > 0.05);
    c.value("above:genie_max", gmax_hi, 0.0, 0.05);
    report("c5", "coupled fixed-point profiles at 9 dB, around 1.655", c);
}

void c6_scan_brackets() {
    Criterion c;
    ThresholdQuery q8;
    q8.family = kUncoupled;
    q8.sigma2 = sigma2_from_snr_db(8.0);
    auto edge8 = first_disagreement_edge(scan_agreement(q8, 0.01));
    c.flag("8dB:no-window", !edge8.has_value());

    ThresholdQuery q85 = q8;
    q85.sigma2 = sigma2_from_snr_db(8.5);
    auto edge85 = first_disagreement_edge(scan_agreement(q85, 0.01));
    c.flag("8.5dB:window-found", edge85.has_value());
    if (edge85) {
        c.flag("8.5dB:window-placed", edge85->first >= 1.52 && edge85->second <= 1.60);
        c.detail << "edge=[" << edge85->first << "," << edge85->second << "] ";
    }
    report("c6", "bistable-window detection at 8.0 / 8.5 dB", c);
}

void c7_structural_invariants() {
    Criterion c;

    QuadratureSpec q126;
    q126.node_count = 126;
    double dd = 0.0;
    for (double lz = -2.0; lz <= 2.0 + 1e-12; lz += 0.25) {
        double z = std::pow(10.0, lz);
        dd = std::max(dd, std::abs(mse_qpsk(NoiseLevel(z)) - mse_qpsk(NoiseLevel(z), q126)));
    }
    c.flag("node-doubling", dd < 1e-9);

    bool rows_ok = true;
    for (int W = 0; W <= 4; ++W)
        rows_ok = rows_ok && validate(build_circular(32, W, 1.8, 1.22, 0.1)).ok;
    c.flag("doubly-stochastic", rows_ok);

    CouplingSystem ring = build_circular(8, 1, 1.9, 1.22, 0.1);
    DEState w = de_step(initial_state(InitMode::worst(), ring), ring);
    DEState g = initial_state(InitMode::genie(), ring);
    bool mono = true, sandwich = true;
    for (int i = 0; i < 30; ++i) {
        DEState wn = de_step(w, ring);
        DEState gn = de_step(g, ring);
        for (int t = 0; t < 8; ++t) {
            mono = mono && wn.sigma_t2[t] <= w.sigma_t2[t] + 1e-15 &&
                   gn.sigma_t2[t] >= g.sigma_t2[t] - 1e-15;
            sandwich = sandwich && gn.sigma_t2[t] <= wn.sigma_t2[t] + 1e-15;
        }
        w = std::move(wn);
        g = std::move(gn);
    }
    c.flag("monotone-sweeps", mono);
    c.flag("genie-below-worst", sandwich);

    c.flag("xi-at-infinity", mse_qpsk(NoiseLevel::infinite()) == 1.0);
    bool xi_mono = true;
    double prev = 0.0;
    for (double z : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        double xi = mse_qpsk(NoiseLevel(z));
        xi_mono = xi_mono && xi > prev;
        prev = xi;
    }
    c.flag("xi-increasing", xi_mono);
    double isat = mutual_info_qpsk(1e4);
    c.flag("info-saturates", isat <= 2.0 * std::log(2.0) + 1e-12 &&
                                 isat >= 2.0 * std::log(2.0) - 1e-3);

    c.flag("diffusion-w1", diffusion_coefficient(1.8, 1, 32) == 1.8 / (4.0 * 32 * 32));
    c.flag("diffusion-scaling",
           diffusion_coefficient(1.8, 1, 64) == diffusion_coefficient(1.8, 1, 32) / 4.0);

    double s2 = sigma2_from_snr_db(10.0);
    DESolution w19 = de_solve(build_uncoupled(1, 1.9, s2), InitMode::worst());
    DESolution g19 = de_solve(build_uncoupled(1, 1.9, s2), InitMode::genie());
    DESolution w21 = de_solve(build_uncoupled(1, 2.1, s2), InitMode::worst());
    DESolution g21 = de_solve(build_uncoupled(1, 2.1, s2), InitMode::genie());
    c.flag("free-energy-ordering",
           g19.free_energy < w19.free_energy && w21.free_energy < g21.free_energy);

    report("c7", "structural invariants", c);
}

}  // namespace

int main() {
    c1_single_period_bp();
    c2_coupled_grid();
    c3_prediction_vs_numeric();
    c4_io_thresholds();
    c5_profiles_around_threshold();
    c6_scan_brackets();
    c7_structural_invariants();
    std::printf("acceptance: %d of 7 criteria passed\n", 7 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
