#include "scdma/coupling.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace scdma {

CouplingSystem::CouplingSystem(int L, std::vector<double> h2, std::vector<double> loads,
                               double sigma2)
    : L_(L), h2_(std::move(h2)), loads_(std::move(loads)), sigma2_(sigma2) {
    if (L < 1) throw std::domain_error("CouplingSystem: L must be >= 1");
    if (h2_.size() != static_cast<std::size_t>(L) * L)
        throw std::domain_error("CouplingSystem: h2 must be L x L");
    if (loads_.size() != static_cast<std::size_t>(L))
        throw std::domain_error("CouplingSystem: loads must have length L");
    for (double b : loads_)
        if (!(b >= 0.0)) throw std::domain_error("CouplingSystem: loads must be >= 0");
    if (!(sigma2 > 0.0)) throw std::domain_error("CouplingSystem: sigma2 must be > 0");
}

CouplingSystem build_uncoupled(int L, double beta, double sigma2) {
    if (L < 1) throw std::domain_error("build_uncoupled: L must be >= 1");
    if (!(beta > 0.0)) throw std::domain_error("build_uncoupled: beta must be > 0");
    std::vector<double> h2(static_cast<std::size_t>(L) * L, 0.0);
    for (int t = 0; t < L; ++t) h2[static_cast<std::size_t>(t) * L + t] = 1.0;
    return CouplingSystem(L, std::move(h2), std::vector<double>(L, beta), sigma2);
}

CouplingSystem build_circular(int L, int W, double beta, double beta_init, double sigma2) {
    if (L < 1) throw std::domain_error("build_circular: L must be >= 1");
    if (W < 0 || W >= L) throw std::domain_error("build_circular: need 0 <= W < L");
    if (!(beta > 0.0)) throw std::domain_error("build_circular: beta must be > 0");
    if (!(beta_init >= 0.0)) throw std::domain_error("build_circular: beta_init must be >= 0");
    std::vector<double> h2(static_cast<std::size_t>(L) * L, 0.0);
    double v = 1.0 / (W + 1);
    for (int t = 0; t < L; ++t)
        for (int k = 0; k <= W; ++k) h2[static_cast<std::size_t>(t) * L + (t - k + L) % L] = v;
    std::vector<double> loads(L, beta);
    for (int t = 0; t < W; ++t) loads[t] = beta_init;
    return CouplingSystem(L, std::move(h2), std::move(loads), sigma2);
}

CouplingSystem build_system(const CouplingSpec& spec, double sigma2) {
    if (spec.kind == CouplingKind::uncoupled)
        return build_uncoupled(spec.L, spec.beta, sigma2);
    return build_circular(spec.L, spec.W, spec.beta, spec.beta_init, sigma2);
}

ValidationReport validate(const CouplingSystem& system) {
    const int L = system.L();
    const double tol = 1e-12;
    ValidationReport rep;
    for (int t = 0; t < L; ++t)
        for (int l = 0; l < L; ++l)
            if (!(system.h2(t, l) >= 0.0)) {
                rep.ok = false;
                std::ostringstream os;
                os << "negative h2 at (" << t << "," << l << "): " << system.h2(t, l);
                rep.detail = os.str();
                return rep;
            }
    for (int t = 0; t < L; ++t) {
        double s = 0.0;
        for (int l = 0; l < L; ++l) s += system.h2(t, l);
        if (std::abs(s - 1.0) > tol) {
            rep.ok = false;
            std::ostringstream os;
            os << "row " << t << " sums to " << s << " (residual " << s - 1.0 << ")";
            rep.detail = os.str();
            return rep;
        }
    }
    for (int l = 0; l < L; ++l) {
        double s = 0.0;
        for (int t = 0; t < L; ++t) s += system.h2(t, l);
        if (std::abs(s - 1.0) > tol) {
            rep.ok = false;
            std::ostringstream os;
            os << "column " << l << " sums to " << s << " (residual " << s - 1.0 << ")";
            rep.detail = os.str();
            return rep;
        }
    }
    return rep;
}

SumRate sum_rate(double beta, double beta_init, int W, long L) {
    if (!(beta > 0.0)) throw std::domain_error("sum_rate: beta must be > 0");
    if (W < 0 || L < 1 || W >= L) throw std::domain_error("sum_rate: need 0 <= W < L");
    if (!(beta_init >= 0.0)) throw std::domain_error("sum_rate: beta_init must be >= 0");
    double frac = static_cast<double>(W) / static_cast<double>(L);
    if (beta_init == 0.0) {
        if (W == 0) return {2.0 * beta, false};
        return {0.0, true};
    }
    return {2.0 / (frac / beta_init + (1.0 - frac) / beta), false};
}

nlohmann::json spec_to_json(const CouplingSpec& spec, double sigma2_db) {
    nlohmann::json j;
    j["kind"] = spec.kind == CouplingKind::uncoupled ? "uncoupled" : "circular";
    j["L"] = spec.L;
    if (spec.kind == CouplingKind::circular) j["W"] = spec.W;
    j["beta"] = spec.beta;
    j["beta_init"] = spec.beta_init;
    j["sigma2_db"] = sigma2_db;
    return j;
}

std::pair<CouplingSpec, double> spec_from_json(const nlohmann::json& j) {
    CouplingSpec spec;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "uncoupled")
        spec.kind = CouplingKind::uncoupled;
    else if (kind == "circular")
        spec.kind = CouplingKind::circular;
    else
        throw std::domain_error("coupling spec: kind must be uncoupled or circular");
    spec.L = j.at("L").get<int>();
    spec.W = j.value("W", 0);
    spec.beta = j.at("beta").get<double>();
    spec.beta_init = j.value("beta_init", 0.0);
    double sigma2_db = j.at("sigma2_db").get<double>();
    // the stored field is 10 log10(sigma2); SNR in dB is its negation
    return {spec, std::pow(10.0, sigma2_db / 10.0)};
}

double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

}  // namespace scdma
