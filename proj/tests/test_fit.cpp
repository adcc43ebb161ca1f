#include <cmath>
#include <vector>

#include "doctest.h"
#include "tricorr/errors.hpp"
#include "tricorr/fit.hpp"
#include "tricorr/rng.hpp"

using namespace tricorr;

namespace {

OpoParams detected_base() {
    OpoParams p;
    p.sigma = 1.34;
    p.eta_twin = 0.80;
    p.eta_pump = 0.45;
    return p;
}

OpoParams truth_params() {
    OpoParams p = detected_base();
    p.delta0 = 0.2;
    p.delta = 0.26;
    p.excess_pump_phase_noise = 15.0;
    return p;
}

std::vector<double> sigma_grid(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = 1.05 + (1.6 - 1.05) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

SigmaScanData noisy_synthetic(std::uint64_t seed, double rel_noise) {
    SigmaScanData data = predict_sigma_scan(truth_params(), sigma_grid(8), 27e6);
    Rng rng(seed);
    for (auto& p : data.points) {
        p.err_q_plus = rel_noise * p.var_q_plus;
        p.err_beta0 = rel_noise * p.beta0;
        p.var_q_plus += p.err_q_plus * rng.gaussian();
        p.beta0 += p.err_beta0 * rng.gaussian();
        p.var_q_plus_corrected = p.var_q_plus - p.beta0;
    }
    data.provenance = "synthetic(seed=" + std::to_string(seed) + ")";
    return data;
}

}  // namespace

TEST_CASE("sigma-scan prediction") {
    SUBCASE("phase-sum squeezing close to threshold at zero detunings") {
        OpoParams p = detected_base();
        const SigmaScanData d = predict_sigma_scan(p, {std::vector<double>{1.02, 1.05}}, 27e6);
        CHECK(d.points[0].var_q_plus < 1.0);
        CHECK(d.points[1].var_q_plus < 1.0);
    }
    SUBCASE("shot-noise crossing near sigma = 1.2 at the fitted parameters") {
        std::vector<double> grid;
        for (double s = 1.05; s <= 1.6001; s += 0.005) grid.push_back(s);
        const SigmaScanData d = predict_sigma_scan(truth_params(), grid, 27e6);
        double crossing = 0.0;
        for (std::size_t i = 1; i < d.points.size(); ++i)
            if (d.points[i - 1].var_q_plus < 1.0 && d.points[i].var_q_plus >= 1.0) {
                crossing = d.points[i].sigma;
                break;
            }
        CHECK(crossing > 1.05);
        CHECK(crossing == doctest::Approx(1.2).epsilon(0.15 / 1.2));
    }
    SUBCASE("beta0 grows toward the sigma = 1.5 region") {
        const SigmaScanData d =
            predict_sigma_scan(truth_params(), {std::vector<double>{1.1, 1.5}}, 27e6);
        CHECK(d.points[1].beta0 > d.points[0].beta0);
    }
    SUBCASE("corrected column is exactly variance minus beta0") {
        const SigmaScanData d = predict_sigma_scan(truth_params(), sigma_grid(8), 27e6);
        for (const auto& p : d.points)
            CHECK(p.var_q_plus_corrected ==
                  doctest::Approx(p.var_q_plus - p.beta0).epsilon(1e-12));
    }
    SUBCASE("below-threshold grid point throws") {
        CHECK_THROWS_AS(
            predict_sigma_scan(detected_base(), {std::vector<double>{0.9, 1.3}}, 27e6),
            below_threshold_error);
    }
}

TEST_CASE("nelder-mead on a convex bowl") {
    auto f = [](std::span<const double> x) {
        return (x[0] - 1.0) * (x[0] - 1.0) + 10.0 * (x[1] + 2.0) * (x[1] + 2.0);
    };
    const std::vector<double> init{0.0, 0.0};
    const SimplexResult r = nelder_mead(f, init, 0.5, 500, 1e-14);
    CHECK(r.converged);
    CHECK(r.best[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.best[1] == doctest::Approx(-2.0).epsilon(1e-4));
    for (std::size_t i = 1; i < r.history.size(); ++i)
        CHECK(r.history[i] <= r.history[i - 1]);
}

TEST_CASE("fit input contracts") {
    const SigmaScanData good = noisy_synthetic(1, 0.02);
    SUBCASE("too few points") {
        SigmaScanData d = good;
        d.points.resize(3);
        CHECK_THROWS_AS(fit_parameters(d, detected_base(), 27e6, {}), invalid_input);
    }
    SUBCASE("degenerate sigma values") {
        SigmaScanData d = good;
        for (auto& p : d.points) p.sigma = 1.3;
        CHECK_THROWS_AS(fit_parameters(d, detected_base(), 27e6, {}), invalid_input);
    }
    SUBCASE("init outside bounds") {
        FitOptions opt;
        opt.init = {1.5, 0.0, 10.0};
        CHECK_THROWS_AS(fit_parameters(good, detected_base(), 27e6, opt), invalid_input);
    }
}

TEST_CASE("noise-free data with a truth init is a fixed point") {
    SigmaScanData d = predict_sigma_scan(truth_params(), sigma_grid(8), 27e6);
    FitOptions opt;
    opt.init = {0.2, 0.26, 15.0};
    const FitResult r = fit_parameters(d, detected_base(), 27e6, opt);
    CHECK(r.residual < 1e-10);
    CHECK(r.delta0 == doctest::Approx(0.2).epsilon(1e-3));
    CHECK(r.delta == doctest::Approx(0.26).epsilon(1e-3));
    CHECK(r.s_q0 == doctest::Approx(15.0).epsilon(1e-3));
}

TEST_CASE("roundtrip recovery from a cold start") {
    const SigmaScanData d = noisy_synthetic(2, 0.02);
    FitOptions opt;
    opt.init = {0.0, 0.0, 10.0};
    const FitResult r = fit_parameters(d, detected_base(), 27e6, opt);
    CHECK(std::abs(r.delta0 - 0.2) < 0.05);
    CHECK(std::abs(r.delta - 0.26) < 0.05);
    CHECK(std::abs(r.s_q0 - 15.0) < 3.0);
    // Iteration log shows monotone improvement.
    for (std::size_t i = 1; i < r.residual_history.size(); ++i)
        CHECK(r.residual_history[i] <= r.residual_history[i - 1]);
    CHECK(r.point_residuals.size() == d.points.size());
}

TEST_CASE("zero-detuning data with excess noise pinned to zero") {
    OpoParams zero = detected_base();
    const SigmaScanData d = predict_sigma_scan(zero, sigma_grid(8), 27e6);
    FitOptions opt;
    opt.init = {0.1, 0.1, 0.0};
    opt.s_q0_max = 0.0;  // pin the excess pump noise
    const FitResult r = fit_parameters(d, detected_base(), 27e6, opt);
    CHECK(std::abs(r.delta0) < 0.02);
    CHECK(std::abs(r.delta) < 0.02);
    CHECK(r.s_q0 == 0.0);
}

TEST_CASE("determinism of the fit for a fixed init") {
    const SigmaScanData d = noisy_synthetic(3, 0.02);
    FitOptions opt;
    opt.init = {0.05, -0.05, 5.0};
    const FitResult a = fit_parameters(d, detected_base(), 27e6, opt);
    const FitResult b = fit_parameters(d, detected_base(), 27e6, opt);
    CHECK(a.delta0 == b.delta0);
    CHECK(a.delta == b.delta);
    CHECK(a.s_q0 == b.s_q0);
    CHECK(a.residual == b.residual);
}
