#include "scdma/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace scdma {
namespace {

CouplingSystem system_at(const CouplingSpec& family, double beta, double sigma2) {
    CouplingSpec s = family;
    s.beta = beta;
    return build_system(s, sigma2);
}

struct SolutionPair {
    DESolution worst, genie;
    double gap;  // max_l |xi_l difference|
};

SolutionPair solve_pair(const ThresholdQuery& query, double beta) {
    CouplingSystem sys = system_at(query.family, beta, query.sigma2);
    SolutionPair p{de_solve(sys, InitMode::worst(), query.de_tol, query.de_max_iter, query.quad),
                   de_solve(sys, InitMode::genie(), query.de_tol, query.de_max_iter, query.quad),
                   0.0};
    for (int l = 0; l < sys.L(); ++l)
        p.gap = std::max(p.gap, std::abs(p.worst.mse[l] - p.genie.mse[l]));
    return p;
}

}  // namespace

bool solutions_agree(const ThresholdQuery& query, double beta) {
    return solve_pair(query, beta).gap < query.match_tol;
}

double bp_threshold(const ThresholdQuery& query) {
    if (!(query.beta_lo < query.beta_hi) || !(query.tol > 0.0))
        throw std::domain_error("bp_threshold: need beta_lo < beta_hi and tol > 0");
    bool lo_agrees = solutions_agree(query, query.beta_lo);
    bool hi_agrees = solutions_agree(query, query.beta_hi);
    if (lo_agrees == hi_agrees) {
        std::ostringstream os;
        os << "bp_threshold: bracket [" << query.beta_lo << ", " << query.beta_hi
           << "] does not straddle: ";
        if (lo_agrees)
            os << "both-agree (the disagreement region is an interval; place beta_hi "
                  "inside it, e.g. via scan_agreement)";
        else
            os << "both-disagree";
        throw bracket_error(lo_agrees ? bracket_error::Diagnosis::both_agree
                                      : bracket_error::Diagnosis::both_disagree,
                            os.str());
    }
    if (!lo_agrees)
        throw bracket_error(bracket_error::Diagnosis::both_disagree,
                            "bp_threshold: solutions already disagree at beta_lo");
    double lo = query.beta_lo, hi = query.beta_hi;
    while (hi - lo > query.tol) {
        double mid = 0.5 * (lo + hi);
        (solutions_agree(query, mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double bp_threshold_scanned(const ThresholdQuery& query, double scan_step) {
    if (!(scan_step > 0.0)) throw std::domain_error("bp_threshold_scanned: step must be > 0");
    if (!solutions_agree(query, query.beta_lo))
        throw bracket_error(bracket_error::Diagnosis::both_disagree,
                            "bp_threshold_scanned: solutions already disagree at beta_lo");
    double prev = query.beta_lo;
    for (double b = query.beta_lo + scan_step; b <= query.beta_hi + 1e-12; b += scan_step) {
        double beta = std::min(b, query.beta_hi);
        if (!solutions_agree(query, beta)) {
            ThresholdQuery narrowed = query;
            narrowed.beta_lo = prev;
            narrowed.beta_hi = beta;
            return bp_threshold(narrowed);
        }
        prev = beta;
    }
    throw bracket_error(bracket_error::Diagnosis::both_agree,
                        "bp_threshold_scanned: no disagreement found on the bracket");
}

AgreementScan scan_agreement(const ThresholdQuery& query, double step) {
    if (!(step > 0.0)) throw std::domain_error("scan_agreement: step must be > 0");
    AgreementScan scan;
    for (double b = query.beta_lo; b <= query.beta_hi + 1e-12;
         b = std::min(b + step, query.beta_hi + 2e-12)) {
        double beta = std::min(b, query.beta_hi);
        scan.beta.push_back(beta);
        scan.agree.push_back(solutions_agree(query, beta));
    }
    return scan;
}

std::optional<std::pair<double, double>> first_disagreement_edge(const AgreementScan& scan) {
    for (std::size_t i = 1; i < scan.beta.size(); ++i)
        if (scan.agree[i - 1] && !scan.agree[i]) return std::make_pair(scan.beta[i - 1], scan.beta[i]);
    return std::nullopt;
}

namespace {

// F(genie branch) - F(worst branch), or nothing when the branches coincide.
std::optional<double> free_energy_gap(const ThresholdQuery& query, double beta) {
    SolutionPair p = solve_pair(query, beta);
    if (p.gap < query.match_tol) return std::nullopt;
    return p.genie.free_energy - p.worst.free_energy;
}

double io_threshold_impl(const ThresholdQuery& query) {
    // walk the bracket for the first load where the large-MSE branch wins
    // (positive gap); bisect against "undefined or negative"
    const double step = 0.05;
    std::optional<double> first_pos;
    bool saw_two_branches = false;
    for (double b = query.beta_lo; b <= query.beta_hi + 1e-12; b += step) {
        double beta = std::min(b, query.beta_hi);
        auto gap = free_energy_gap(query, beta);
        if (gap) saw_two_branches = true;
        if (gap && *gap > 0.0) {
            first_pos = beta;
            break;
        }
    }
    if (!first_pos) {
        if (!saw_two_branches)
            throw unique_regime_error(
                "io threshold: unique solution regime (one fixed-point branch on the "
                "whole bracket)");
        throw std::domain_error(
            "io threshold: free-energy difference does not change sign on the bracket");
    }
    double lo = *first_pos - step, hi = *first_pos;
    lo = std::max(lo, query.beta_lo);
    while (hi - lo > query.tol) {
        double mid = 0.5 * (lo + hi);
        auto gap = free_energy_gap(query, mid);
        (gap && *gap > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double io_threshold_uncoupled(double sigma2, double beta_lo, double beta_hi, double tol,
                              const QuadratureSpec& q) {
    ThresholdQuery query;
    query.family = {CouplingKind::uncoupled, 1, 0, 1.0, 0.0};
    query.sigma2 = sigma2;
    query.beta_lo = beta_lo;
    query.beta_hi = beta_hi;
    query.tol = tol;
    query.quad = q;
    return io_threshold_impl(query);
}

double io_threshold_coupled(const CouplingSpec& family, double sigma2, double beta_lo,
                            double beta_hi, double tol, const QuadratureSpec& q) {
    ThresholdQuery query;
    query.family = family;
    query.sigma2 = sigma2;
    query.beta_lo = beta_lo;
    query.beta_hi = beta_hi;
    query.tol = tol;
    query.quad = q;
    return io_threshold_impl(query);
}

// ---------------------------------------------------------------- potential

MseInverseTable::MseInverseTable(const QuadratureSpec& q, int nodes) {
    // sample z log-spaced so that xi(z) covers (1e-12, 1-1e-7), then store the
    // inverse samples (log y -> log z); xi is strictly increasing so the
    // samples are sorted
    const double z_lo = 0.018, z_hi = 1e7;
    ly_.reserve(nodes);
    lz_.reserve(nodes);
    double prev_y = 0.0;
    for (int i = 0; i < nodes; ++i) {
        double lz = std::log(z_lo) + (std::log(z_hi) - std::log(z_lo)) * i / (nodes - 1.0);
        double y = mse_qpsk(NoiseLevel(std::exp(lz)), q);
        if (y <= prev_y || y >= 1.0) continue;  // drop flat tail samples
        prev_y = y;
        ly_.push_back(std::log(y));
        lz_.push_back(lz);
    }
    const std::size_t n = ly_.size();
    // Fritsch-Carlson monotone cubic slopes
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = ly_[i + 1] - ly_[i];
        delta[i] = (lz_[i + 1] - lz_[i]) / h[i];
    }
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0)
            d_[i] = 0.0;
        else {
            double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    y_min_ = std::exp(ly_.front());
    y_max_ = std::exp(ly_.back());
}

double MseInverseTable::operator()(double y) const {
    double t = std::log(std::clamp(y, y_min_, y_max_));
    auto it = std::upper_bound(ly_.begin(), ly_.end(), t);
    std::size_t i = std::min(ly_.size() - 2,
                             static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                 0, std::distance(ly_.begin(), it) - 1)));
    double h = ly_[i + 1] - ly_[i], s = (t - ly_[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return std::exp(h00 * lz_[i] + h10 * h * d_[i] + h01 * lz_[i + 1] + h11 * h * d_[i + 1]);
}

const MseInverseTable& mse_inverse_table(const QuadratureSpec& q) {
    static std::mutex mu;
    static std::map<int, MseInverseTable> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(q.node_count);
    if (it == cache.end()) it = cache.emplace(q.node_count, MseInverseTable(q)).first;
    return it->second;
}

namespace {

// stable roots and saddle of y = xi(sigma2 + beta y), by log-grid sign scan
// of g(y) = xi(sigma2 + beta y) - y plus bisection refinement on the exact
// kernel (the table is not used here: stationary points feed 1e-8 contracts)
std::vector<StationaryPoint> stationary_points(double beta, double sigma2,
                                               const QuadratureSpec& q) {
    const int n = 2400;
    const double y_lo = 1e-9, y_hi = 0.999;
    auto g = [&](double y) { return mse_qpsk(NoiseLevel(sigma2 + beta * y), q) - y; };
    std::vector<StationaryPoint> out;
    double prev_y = y_lo, prev_g = g(y_lo);
    for (int i = 1; i < n; ++i) {
        double y = y_lo * std::pow(y_hi / y_lo, i / (n - 1.0));
        double gy = g(y);
        if ((prev_g > 0.0) != (gy > 0.0)) {
            double a = prev_y, b = y;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (a + b);
                ((g(m) > 0.0) == (prev_g > 0.0) ? a : b) = m;
            }
            // g passing + -> - is a minimum of U (U' = -g * d(xi^-1)/dy scale)
            out.push_back({0.5 * (a + b), 0.0, prev_g > 0.0});
        }
        prev_y = y;
        prev_g = gy;
    }
    return out;
}

// int_a^b (xi^-1(u) - sigma2 - beta u) du with the memoized inverse;
// 64-point Gauss-Legendre per panel is far below every consumer's tolerance
double potential_increment(double a, double b, double beta, double sigma2,
                           const MseInverseTable& inv) {
    static const std::vector<std::pair<double, double>> rule = [] {
        // Newton on Legendre P_64 (gauleg)
        const int n = 64;
        std::vector<std::pair<double, double>> r(n);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) < 1e-15) break;
            }
            double w = 2.0 / ((1.0 - z * z) * pp * pp);
            r[i] = {-z, w};
            r[n - 1 - i] = {z, w};
        }
        return r;
    }();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a), acc = 0.0;
    for (auto [x, w] : rule) {
        double u = mid + half * x;
        acc += w * (inv(u) - sigma2 - beta * u);
    }
    return acc * half;
}

}  // namespace

PotentialProfile potential(double beta, double sigma2, const std::vector<double>& y_grid,
                           const QuadratureSpec& q) {
    if (!(sigma2 > 0.0)) throw std::domain_error("potential: sigma2 must be > 0");
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        if (!(y_grid[i] > 0.0) || !(y_grid[i] < 1.0))
            throw std::domain_error("potential: grid must lie inside (0,1)");
        if (i > 0 && !(y_grid[i] > y_grid[i - 1]))
            throw std::domain_error("potential: grid must be sorted ascending");
    }
    const MseInverseTable& inv = mse_inverse_table(q);
    PotentialProfile prof;
    prof.beta = beta;
    prof.y = y_grid;
    prof.U.resize(y_grid.size());
    const double eps = 1e-9;
    double u = 0.0, prev = eps;
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        double yi = y_grid[i];
        if (yi > prev) {
            // split long spans so the fixed rule always sees a mild panel
            int panels = std::max(1, static_cast<int>(std::ceil(std::log(yi / prev) / 0.7)));
            for (int p = 0; p < panels; ++p) {
                double a = prev * std::pow(yi / prev, static_cast<double>(p) / panels);
                double b = prev * std::pow(yi / prev, (p + 1.0) / panels);
                u += potential_increment(a, b, beta, sigma2, inv);
            }
            prev = yi;
        }
        prof.U[i] = u;
    }
    prof.stationary = stationary_points(beta, sigma2, q);
    for (auto& sp : prof.stationary) {
        double acc = 0.0;
        if (sp.y > eps) {
            int panels = std::max(1, static_cast<int>(std::ceil(std::log(sp.y / eps) / 0.7)));
            for (int p = 0; p < panels; ++p) {
                double a = eps * std::pow(sp.y / eps, static_cast<double>(p) / panels);
                double b = eps * std::pow(sp.y / eps, (p + 1.0) / panels);
                acc += potential_increment(a, b, beta, sigma2, inv);
            }
        }
        sp.U = acc;
    }
    return prof;
}

namespace {

// depth(large-MSE well) - depth(small-MSE well) = int_{y1}^{y2} U'(u) du,
// or nothing when U does not have two minima at this load
std::optional<double> well_depth_gap(double beta, double sigma2, const QuadratureSpec& q) {
    auto sp = stationary_points(beta, sigma2, q);
    std::vector<double> minima;
    for (const auto& s : sp)
        if (s.is_minimum) minima.push_back(s.y);
    if (minima.size() != 2) return std::nullopt;
    const MseInverseTable& inv = mse_inverse_table(q);
    double a = minima[0], b = minima[1], acc = 0.0;
    int panels = std::max(1, static_cast<int>(std::ceil(std::log(b / a) / 0.7)));
    for (int p = 0; p < panels; ++p) {
        double u0 = a * std::pow(b / a, static_cast<double>(p) / panels);
        double u1 = a * std::pow(b / a, (p + 1.0) / panels);
        acc += potential_increment(u0, u1, beta, sigma2, inv);
    }
    return acc;
}

}  // namespace

double potential_threshold(double sigma2, double beta_lo, double beta_hi, double tol,
                           const QuadratureSpec& q) {
    if (!(beta_lo < beta_hi) || !(tol > 0.0))
        throw std::domain_error("potential_threshold: need beta_lo < beta_hi and tol > 0");
    // walk for a sign change of the depth gap (positive: large-MSE well is
    // shallower, i.e. below the crossing)
    const double step = 0.05;
    bool saw_two_minima = false;
    std::optional<double> prev_gap;
    double prev_beta = beta_lo;
    std::optional<std::pair<double, double>> bracket;
    for (double b = beta_lo; b <= beta_hi + 1e-12; b += step) {
        double beta = std::min(b, beta_hi);
        auto gap = well_depth_gap(beta, sigma2, q);
        if (gap) {
            saw_two_minima = true;
            if (prev_gap && (*prev_gap > 0.0) != (*gap > 0.0)) {
                bracket = {prev_beta, beta};
                break;
            }
            prev_gap = gap;
            prev_beta = beta;
        }
    }
    if (!bracket) {
        if (!saw_two_minima)
            throw unique_regime_error(
                "potential_threshold: single-minimum regime on the whole bracket");
        throw std::domain_error(
            "potential_threshold: well depths do not cross on the bracket");
    }
    double lo = bracket->first, hi = bracket->second;
    bool lo_positive = *well_depth_gap(lo, sigma2, q) > 0.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        auto gap = well_depth_gap(mid, sigma2, q);
        if (!gap)
            throw std::domain_error("potential_threshold: lost bistability inside bracket");
        ((*gap > 0.0) == lo_positive ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double diffusion_coefficient(double beta, int W, long L) {
    if (W < 0 || L < 1) throw std::domain_error("diffusion_coefficient: need W >= 0, L >= 1");
    double s = 0.0;
    for (int t = 0; t <= W; ++t)
        for (int l = 0; l <= W; ++l) s += static_cast<double>(t - l) * (t - l);
    double wp1 = W + 1.0;
    return beta / (2.0 * wp1 * wp1 * static_cast<double>(L) * L) * s;
}

nlohmann::json threshold_to_json(const std::string& kind, const CouplingSpec& family,
                                 double snr_db, double threshold, double tolerance) {
    nlohmann::json j;
    j["kind"] = kind;
    j["snr_db"] = snr_db;
    j["family"] = family.kind == CouplingKind::uncoupled ? "uncoupled" : "circular";
    j["L"] = family.L;
    j["W"] = family.W;
    j["beta_init"] = family.beta_init;
    j["threshold"] = threshold;
    j["tolerance"] = tolerance;
    return j;
}

}  // namespace scdma
