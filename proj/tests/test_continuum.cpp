#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "scdma/continuum.hpp"

using namespace scdma;

namespace {

ContinuumConfig config_at(const ContinuumFamily& fam, double beta) {
    ContinuumConfig cfg;
    cfg.u_prime = fam.u_prime_at(beta);
    if (fam.u_second_at) cfg.u_second = fam.u_second_at(beta);
    cfg.D = fam.diffusion(beta);
    cfg.M = fam.M;
    cfg.y_bnd = fam.y_boundary(beta);
    cfg.max_iter = fam.max_iter;
    cfg.tol = fam.tol;
    cfg.step_scale = fam.step_scale;
    return cfg;
}

double max_dev(const std::vector<double>& y, double ref) {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v - ref));
    return m;
}

}  // namespace

TEST_CASE("a drift-free uniform field is already stationary") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double) { return 0.0; };
    cfg.M = 17;
    cfg.y_bnd = 0.7;
    ContinuumResult res = run_to_stationary(cfg);
    CHECK(res.converged);
    CHECK(res.residual == 0.0);
    CHECK(res.state.iteration == 1);
    for (double v : res.state.y) CHECK(v == 0.7);
    CHECK_FALSE(res.stability_warning);
}

TEST_CASE("pure diffusion smooths a hat down to the pinned boundary value") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double) { return 0.0; };
    cfg.M = 33;
    cfg.D = 0.1 / 1024.0;  // dimensionless dh2 = 0.1
    std::vector<double> hat(33, 0.0);
    for (int i = 0; i < 33; ++i) hat[i] = 1.0 - std::abs(i - 16) / 16.0;

    ContinuumState s{hat, 0};
    double peak = 1.0;
    for (int k = 0; k < 20; ++k) {
        s = continuum_step(s, cfg);
        double m = *std::max_element(s.y.begin(), s.y.end());
        CHECK(m < peak);
        peak = m;
    }

    ContinuumResult res = run_to_stationary(cfg, hat);
    CHECK(res.converged);
    CHECK(max_dev(res.state.y, 0.0) < 1e-6);
}

TEST_CASE("a single quadratic well pulls the whole field to its bottom") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double y) { return y - 0.3; };
    cfg.u_second = [](double) { return 1.0; };
    cfg.M = 21;
    cfg.D = 1e-4;
    cfg.y_bnd = 0.3;
    std::vector<double> init(21);
    for (int i = 0; i < 21; ++i) init[i] = (i % 2 == 0) ? 0.0 : 0.8;
    ContinuumResult res = run_to_stationary(cfg, init);
    CHECK(res.converged);
    CHECK_FALSE(res.stability_warning);
    CHECK(max_dev(res.state.y, 0.3) < 1e-8);
    CHECK(res.residual < 1e-9);
}

TEST_CASE("zero diffusion decouples the grid points completely") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double y) { return y * y * y - y; };  // wells at +-1
    cfg.D = 0.0;
    cfg.M = 5;
    cfg.step_scale = 0.13;
    // neighbors fall into opposite wells: no interaction at D = 0
    ContinuumResult res = run_to_stationary(cfg, {0.0, -0.8, 0.4, 0.9, 0.0});
    REQUIRE(res.converged);
    CHECK(res.state.y[1] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(res.state.y[2] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.state.y[3] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.state.y[0] == 0.0);
    CHECK(res.state.y[4] == 0.0);
}

TEST_CASE("one update only reaches nearest neighbours") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double) { return 0.0; };
    cfg.M = 17;
    cfg.D = 0.5 / 256.0;  // dh2 = 0.5
    std::vector<double> y(17, 0.0);
    y[8] = 0.1;
    ContinuumState next = continuum_step(ContinuumState{y, 0}, cfg);
    CHECK(next.y[7] == 0.05);
    CHECK(next.y[8] == 0.0);
    CHECK(next.y[9] == 0.05);
    CHECK(next.y[6] == 0.0);
    CHECK(next.y[10] == 0.0);
    CHECK(next.iteration == 1);
}

TEST_CASE("boundary samples are re-pinned on every step") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double) { return 0.0; };
    cfg.M = 9;
    cfg.y_bnd = 0.25;
    std::vector<double> stray(9, 0.25);
    stray.front() = 0.9;
    stray.back() = -0.4;
    ContinuumState next = continuum_step(ContinuumState{stray, 0}, cfg);
    CHECK(next.y.front() == 0.25);
    CHECK(next.y.back() == 0.25);
}

TEST_CASE("tilted double well: boundary at the global well, interior metastable") {
    ContinuumFamily fam = quartic_double_well_family();
    // wells of y^3 - y + beta with beta = -0.1: left (boundary) is the shallow
    // one, the interior well is global and the profile must stay nonuniform
    double yb = fam.y_boundary(-0.1);
    double ym = fam.y_metastable(-0.1);
    CHECK(yb < -0.9);
    CHECK(ym > 0.9);
    CHECK(std::abs(yb * yb * yb - yb - 0.1) < 1e-12);
    CHECK(std::abs(ym * ym * ym - ym - 0.1) < 1e-12);

    ContinuumConfig cfg = config_at(fam, -0.1);
    std::vector<double> init(cfg.M, ym);
    ContinuumResult res = run_to_stationary(cfg, init);
    REQUIRE(res.converged);
    CHECK(max_dev(res.state.y, cfg.y_bnd) > 0.5);
    CHECK(res.state.y[cfg.M / 2] == doctest::Approx(ym).epsilon(1e-3));

    // flipping the tilt makes the boundary well global and erases the bulk
    ContinuumConfig up = config_at(fam, 0.1);
    std::vector<double> init2(up.M, fam.y_metastable(0.1));
    ContinuumResult swept = run_to_stationary(up, init2);
    REQUIRE(swept.converged);
    CHECK(max_dev(swept.state.y, up.y_bnd) < 0.05);
}

TEST_CASE("the stationary bulk value survives grid refinement at fixed diffusion") {
    const double D = 2.0 / 16384.0;
    auto run = [&](int M) {
        ContinuumFamily fam = quartic_double_well_family(D * (M - 1.0) * (M - 1.0), M);
        ContinuumConfig cfg = config_at(fam, -0.1);
        std::vector<double> init(cfg.M, fam.y_metastable(-0.1));
        ContinuumResult res = run_to_stationary(cfg, init);
        REQUIRE(res.converged);
        return res.state.y;
    };
    std::vector<double> coarse = run(65), fine = run(129);
    for (int j = 13; j <= 52; ++j)  // bulk only; the boundary layer sharpens with M
        CHECK(std::abs(fine[2 * j] - coarse[j]) < 1e-3);
}

TEST_CASE("equal-depth load of the symmetric double well is recovered") {
    ContinuumFamily fam = quartic_double_well_family();
    double x = continuum_bp_threshold(fam, -0.15, 0.15, 1e-4);
    CHECK(std::abs(x) < 5e-3);
}

TEST_CASE("strong diffusion drags the collapse threshold past the equal-depth point") {
    // dh2 = 20.48 on a 33-point grid: boundary influence reaches the bulk and
    // the uniform outcome wins even where the interior well is deeper
    ContinuumFamily fam = quartic_double_well_family(20.48, 33, 0.01);
    double x = continuum_bp_threshold(fam, -0.15, 0.0, 1e-3);
    CHECK(x < -0.02);
    CHECK(x > -0.15);
}

TEST_CASE("multiuser potential family collapses below threshold, stalls above") {
    ContinuumFamily fam = cdma_continuum_family(0.1, 64, 1);
    CHECK(fam.diffusion(1.8) == doctest::Approx(1.8 / (4.0 * 64 * 64)).epsilon(1e-15));

    ContinuumConfig below = config_at(fam, 1.78);
    std::vector<double> seed(below.M, fam.y_metastable(1.78));
    ContinuumResult collapsed = run_to_stationary(below, seed);
    REQUIRE(collapsed.converged);
    CHECK(max_dev(collapsed.state.y, below.y_bnd) < 0.05);

    ContinuumConfig above = config_at(fam, 1.85);
    std::vector<double> seed2(above.M, fam.y_metastable(1.85));
    ContinuumResult stuck = run_to_stationary(above, seed2);
    REQUIRE(stuck.converged);
    CHECK(max_dev(stuck.state.y, above.y_bnd) > 0.1);

    CHECK_THROWS_AS(fam.y_boundary(1.6), std::domain_error);  // unique-solution load
}

TEST_CASE("multiuser collapse threshold approximates the equal-depth prediction") {
    ContinuumFamily fam = cdma_continuum_family(0.1, 64, 1);
    double x = continuum_bp_threshold(fam, 1.78, 1.85, 2.5e-3);
    CHECK(std::abs(x - 1.8121) < 0.01);
}

TEST_CASE("the literal explicit map is flagged as unstable for stiff wells") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double y) { return y * y * y - y; };
    cfg.u_second = [](double y) { return 3.0 * y * y - 1.0; };
    cfg.D = 2.0 / 16384.0;
    cfg.M = 129;
    cfg.y_bnd = -1.0;
    cfg.step_scale = 1.0;  // U'' + 4 dh2 = 10 at the wells: divergent
    cfg.max_iter = 200;
    std::vector<double> init(129, -0.9);
    ContinuumResult res = run_to_stationary(cfg, init);
    CHECK(res.stability_warning);
    CHECK_FALSE(res.converged);

    cfg.step_scale = 0.13;
    cfg.max_iter = 200000;
    ContinuumResult ok = run_to_stationary(cfg, init);
    CHECK_FALSE(ok.stability_warning);
    CHECK(ok.converged);
}

TEST_CASE("configuration and bracket validation") {
    ContinuumConfig cfg;
    cfg.u_prime = [](double) { return 0.0; };

    ContinuumConfig bad = cfg;
    bad.M = 2;
    CHECK_THROWS_AS(run_to_stationary(bad), std::domain_error);
    bad = cfg;
    bad.D = -1e-9;
    CHECK_THROWS_AS(run_to_stationary(bad), std::domain_error);
    bad = cfg;
    bad.tol = 0.0;
    CHECK_THROWS_AS(run_to_stationary(bad), std::domain_error);
    bad = cfg;
    bad.max_iter = 0;
    CHECK_THROWS_AS(run_to_stationary(bad), std::domain_error);
    bad = cfg;
    bad.step_scale = 0.0;
    CHECK_THROWS_AS(run_to_stationary(bad), std::domain_error);
    CHECK_THROWS_AS(run_to_stationary(ContinuumConfig{}), std::domain_error);  // no drift
    CHECK_THROWS_AS(run_to_stationary(cfg, std::vector<double>(5, 0.0)), std::domain_error);
    CHECK_THROWS_AS(continuum_step(ContinuumState{{0.0, 0.0}, 0}, cfg), std::domain_error);

    ContinuumFamily fam = quartic_double_well_family();
    CHECK_THROWS_AS(continuum_bp_threshold(fam, 0.2, 0.1, 1e-3), std::domain_error);
    CHECK_THROWS_AS(continuum_bp_threshold(fam, -0.1, 0.1, 0.0), std::domain_error);
    CHECK_THROWS_AS(continuum_bp_threshold(ContinuumFamily{}, -0.1, 0.1, 1e-3),
                    std::domain_error);
    CHECK_THROWS_AS(continuum_bp_threshold(fam, 0.05, 0.15, 1e-2), std::domain_error);
    CHECK_THROWS_AS(quartic_double_well_family(-1.0), std::domain_error);
    CHECK_THROWS_AS(cdma_continuum_family(0.0, 64, 1), std::domain_error);
}
