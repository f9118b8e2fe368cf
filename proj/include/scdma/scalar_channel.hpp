#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace scdma {

// Effective noise variance per unit signal power, z = 1/sir.  The worst-case
// initialization needs a genuine "no information" level, so infinity is a
// first-class value; finite levels must be strictly positive.
class NoiseLevel {
public:
    explicit NoiseLevel(double z) : z_(z) {
        if (std::isnan(z) || z <= 0.0)
            throw std::domain_error("NoiseLevel: variance must be > 0 or infinite");
    }
    static NoiseLevel infinite() {
        return NoiseLevel(std::numeric_limits<double>::infinity());
    }
    double value() const { return z_; }
    bool is_infinite() const { return std::isinf(z_); }

private:
    double z_;
};

// Gauss-Hermite rule over the standard Gaussian weight (weights renormalized
// to sum to 1).  node_count also sizes the companion rule used for the
// exponential-tail branch of the integrands, so doubling it tightens both.
struct QuadratureSpec {
    int node_count = 63;
    static constexpr const char* scheme = "gauss-hermite";
};

// MMSE of a unit-power QPSK symbol in complex circular Gaussian noise of
// variance z; two independent BPSK dimensions of per-dimension SNR 1/z.
// Exactly 1 at infinite z, strictly increasing, bounded in [0,1].
double mse_qpsk(NoiseLevel z, const QuadratureSpec& q = {});

// Inverse of mse_qpsk on (0,1), by bisection in log z.
double mse_inverse(double y, const QuadratureSpec& q = {});

// Input-output mutual information of unit-power QPSK at signal-to-noise
// ratio sir, in nats; saturates at ln 4.
double mutual_info_qpsk(double sir, const QuadratureSpec& q = {});

// KL divergence between circular complex Gaussians of the given variances:
// ln(sigma_t2/sigma2) + sigma2/sigma_t2 - 1.
double kl_complex_gaussian(double sigma2, double sigma_t2);

}  // namespace scdma
