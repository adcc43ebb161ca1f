#include <cmath>
#include <complex>

#include "doctest.h"
#include "tricorr/errors.hpp"
#include "tricorr/opo_model.hpp"

using namespace tricorr;

namespace {

OpoParams fitted_params() {
    OpoParams p;
    p.sigma = 1.34;
    p.delta0 = 0.2;
    p.delta = 0.26;
    p.excess_pump_phase_noise = 15.0;
    p.eta_twin = 0.80;
    p.eta_pump = 0.45;
    return p;
}

Mat6 swap_twins(const Mat6& m) {
    Mat6 perm = Mat6::Zero();
    perm(0, 0) = perm(1, 1) = 1.0;
    perm(2, 4) = perm(3, 5) = 1.0;
    perm(4, 2) = perm(5, 3) = 1.0;
    return perm * m * perm.transpose();
}

}  // namespace

TEST_CASE("parameter validation") {
    OpoParams p;
    SUBCASE("defaults valid") { CHECK_NOTHROW(p.validate()); }
    SUBCASE("sigma must be positive") {
        p.sigma = 0.0;
        CHECK_THROWS_AS(p.validate(), invalid_input);
    }
    SUBCASE("efficiency range") {
        p.eta_twin = 1.2;
        CHECK_THROWS_AS(p.validate(), invalid_input);
    }
    SUBCASE("excess noise nonnegative") {
        p.excess_pump_phase_noise = -1.0;
        CHECK_THROWS_AS(p.validate(), invalid_input);
    }
    SUBCASE("energy conservation of metadata frequencies") {
        p.optical_freqs_hz = {5.6e14, 2.9e14, 2.6e14};
        CHECK_THROWS_AS(p.validate(), invalid_input);
        p.optical_freqs_hz = {5.5e14, 2.9e14, 2.6e14};
        CHECK_NOTHROW(p.validate());
    }
}

TEST_CASE("steady state below and at threshold") {
    OpoParams p;
    p.sigma = 0.5;
    SteadyState ss = steady_state(p);
    CHECK_FALSE(ss.oscillating);
    CHECK(std::abs(ss.signal) == 0.0);
    CHECK(std::abs(ss.idler) == 0.0);

    p.sigma = 1.0;
    ss = steady_state(p);
    CHECK(std::abs(ss.signal) < 1e-9);
}

TEST_CASE("steady state above threshold, zero detunings") {
    OpoParams p;
    p.sigma = 1.34;
    const SteadyState ss = steady_state(p);
    CHECK(ss.oscillating);
    // Twin intensity gamma_r (sqrt(sigma) - 1); cross-checked against time
    // integration of the classical equations when this value was frozen.
    const double expected = p.gamma_ratio() * (std::sqrt(p.sigma) - 1.0);
    CHECK(std::norm(ss.signal) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::norm(ss.signal) == doctest::Approx(0.105055794).epsilon(1e-7));
    // Pump amplitude clamps at the oscillation value.
    CHECK(std::abs(ss.pump) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("twin symmetry of the steady state with detunings") {
    OpoParams p = fitted_params();
    const SteadyState ss = steady_state(p);
    CHECK(ss.oscillating);
    CHECK(std::abs(ss.signal) == doctest::Approx(std::abs(ss.idler)).epsilon(1e-12));
}

TEST_CASE("spectral covariance trivial limits") {
    SUBCASE("all-loss limit returns identity") {
        OpoParams p = fitted_params();
        p.eta_twin = 0.0;
        p.eta_pump = 0.0;
        const SpectralCovariance cov = spectral_covariance(p, 27e6);
        CHECK((cov.matrix - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("coupling off reflects vacuum") {
        OpoParams p;
        p.coupling = false;
        p.delta = 0.3;
        p.delta0 = 0.2;
        const SpectralCovariance cov = spectral_covariance(p, 27e6);
        CHECK((cov.matrix - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("below threshold request throws") {
        OpoParams p;
        p.sigma = 0.5;
        CHECK_THROWS_AS(spectral_covariance(p, 27e6), below_threshold_error);
    }
}

TEST_CASE("zero-detuning intensity-difference squeezing matches the closed form") {
    OpoParams p;
    p.sigma = 1.34;
    for (double omega_hz : {5e6, 27e6, 60e6}) {
        const SpectralCovariance cov = spectral_covariance(p, omega_hz);
        const double w = p.scaled_frequency(omega_hz);
        const double escape = p.twin_transmission / p.total_twin_loss();
        const double closed_form = 1.0 - escape * 4.0 / (w * w + 4.0);
        CHECK(cov.var_p_minus() == doctest::Approx(closed_form).epsilon(1e-9));
    }
}

TEST_CASE("detected covariance frozen values at the fitted operating point") {
    const SpectralCovariance cov = spectral_covariance(fitted_params(), 27e6);
    CHECK(cov.var_p_minus() == doctest::Approx(0.449434).epsilon(1e-5));
    CHECK(cov.var_q_plus() == doctest::Approx(1.242332).epsilon(1e-5));
    CHECK(pump_correction(cov).beta0 == doctest::Approx(0.206150).epsilon(1e-4));
}

TEST_CASE("twin 1<->2 symmetry of all spectra") {
    for (double delta : {0.0, 0.26}) {
        OpoParams p = fitted_params();
        p.delta = delta;
        const SpectralCovariance cov = spectral_covariance(p, 27e6);
        CHECK((cov.matrix - swap_twins(cov.matrix)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("every produced covariance is physical") {
    for (double sigma : {1.05, 1.34, 1.6}) {
        for (double delta : {0.0, 0.26}) {
            for (double s : {0.0, 15.0}) {
                OpoParams p = fitted_params();
                p.sigma = sigma;
                p.delta = delta;
                p.excess_pump_phase_noise = s;
                CHECK_NOTHROW(spectral_covariance(p, 27e6).validate());
            }
        }
    }
}

TEST_CASE("energy-conservation correlation and its detuning transfer") {
    OpoParams p;
    p.sigma = 1.34;
    const SpectralCovariance cov = spectral_covariance(p, 27e6);
    // Phase-phase correlation dominates at zero detunings; the amplitude-phase
    // channel is empty. Sign frozen from the Monte Carlo oracle.
    CHECK(cov.cov_q0_qplus() > 0.05);
    CHECK(std::abs(cov.cov_p0_qplus()) < 1e-10);
    // Detuning transfers correlation into the amplitude-phase channel.
    double prev = 0.0;
    for (double d : {0.05, 0.10, 0.15, 0.20}) {
        OpoParams pd = p;
        pd.delta0 = d;
        pd.delta = 1.3 * d;
        const double c = std::abs(spectral_covariance(pd, 27e6).cov_p0_qplus());
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("beta0 stays inside the reported band over the pump-power range") {
    for (double sigma = 1.05; sigma <= 1.601; sigma += 0.05) {
        OpoParams p = fitted_params();
        p.sigma = sigma;
        const double b = pump_correction(spectral_covariance(p, 27e6)).beta0;
        CHECK(b > 0.05);
        CHECK(b < 0.30);
    }
}

TEST_CASE("detection loss map") {
    const SpectralCovariance cov = spectral_covariance(
        [] { OpoParams p; p.sigma = 1.34; return p; }(), 27e6);
    SUBCASE("unit efficiency is the identity map") {
        const SpectralCovariance out = apply_detection_loss(cov, 1.0, 1.0);
        CHECK((out.matrix - cov.matrix).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("zero efficiency gives vacuum") {
        const SpectralCovariance out = apply_detection_loss(cov, 0.0, 0.0);
        CHECK((out.matrix - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("loss arithmetic on the headline squeezing") {
        SpectralCovariance in = SpectralCovariance::vacuum(27e6);
        in.matrix(2, 4) = in.matrix(4, 2) = 0.59;  // Var p- = 0.41
        CHECK(in.var_p_minus() == doctest::Approx(0.41).epsilon(1e-12));
        const SpectralCovariance out = apply_detection_loss(in, 0.80, 1.0);
        CHECK(out.var_p_minus() == doctest::Approx(0.8 * 0.41 + 0.2).epsilon(1e-12));
        CHECK(out.var_p_minus() == doctest::Approx(0.53).epsilon(0.01));
    }
    SUBCASE("out-of-range efficiency throws") {
        CHECK_THROWS_AS(apply_detection_loss(cov, 1.2, 1.0), invalid_input);
    }
}

TEST_CASE("trajectory simulation contracts") {
    OpoParams p;
    p.sigma = 1.34;
    SUBCASE("step size must resolve the fastest rate") {
        CHECK_THROWS_AS(simulate_trajectories(p, 0.5, 10.0, 2, 1), invalid_input);
    }
    SUBCASE("identical seed gives identical ensembles") {
        const TrajectoryEnsemble a = simulate_trajectories(p, 0.01, 20.0, 3, 42);
        const TrajectoryEnsemble b = simulate_trajectories(p, 0.01, 20.0, 3, 42);
        REQUIRE(a.trajectories.size() == b.trajectories.size());
        for (std::size_t i = 0; i < a.trajectories.size(); ++i)
            CHECK((a.trajectories[i] - b.trajectories[i]).cwiseAbs().maxCoeff() == 0.0);
        const TrajectoryEnsemble c = simulate_trajectories(p, 0.01, 20.0, 3, 43);
        CHECK((a.trajectories[0] - c.trajectories[0]).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("empty cavity reflects shot noise (Monte Carlo)") {
    OpoParams p;
    p.coupling = false;
    McSettings st;
    st.n_traj = 60;
    st.duration = 300.0;
    st.seed = 3;
    const McCovariance mc = monte_carlo_covariance(p, 27e6, st);
    for (int i = 0; i < 6; ++i) {
        const double z = std::abs(mc.covariance.matrix(i, i) - 1.0) / mc.std_error(i, i);
        CHECK(z < 3.0);
    }
}

TEST_CASE("Monte Carlo oracle agrees with the analytic spectra") {
    OpoParams p = fitted_params();
    McSettings st;
    st.n_traj = 80;
    st.duration = 400.0;
    st.seed = 9;
    const McCovariance mc = monte_carlo_covariance(p, 27e6, st);
    const SpectralCovariance an = spectral_covariance(p, 27e6);
    int outside = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) {
            const double z =
                std::abs(mc.covariance.matrix(i, j) - an.matrix(i, j)) / mc.std_error(i, j);
            if (z > 3.0) ++outside;
        }
    CHECK(outside == 0);
}

TEST_CASE("phase-sum squeezing close to threshold (Monte Carlo)") {
    OpoParams p;
    p.sigma = 1.05;
    McSettings st;
    st.n_traj = 60;
    st.duration = 300.0;
    st.seed = 17;
    const McCovariance mc = monte_carlo_covariance(p, 27e6, st);
    CHECK(mc.covariance.var_q_plus() < 1.0);
    CHECK(spectral_covariance(p, 27e6).var_q_plus() < 1.0);
}
