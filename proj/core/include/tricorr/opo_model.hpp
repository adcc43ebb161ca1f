#ifndef TRICORR_OPO_MODEL_HPP
#define TRICORR_OPO_MODEL_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "tricorr/quadratures.hpp"

namespace tricorr {

/// Parameters of the triply resonant above-threshold OPO plus the detection
/// chain. Detunings and analysis frequencies are normalized internally to the
/// twin-beam cavity half-bandwidth (bw_twin_hz is the FWHM).
struct OpoParams {
    double sigma = 1.34;           // pump power over (detuned) threshold power
    double delta0 = 0.0;           // pump cavity detuning, twin half-bandwidth units
    double delta = 0.0;            // twin cavity detuning, same units
    double bw_twin_hz = 50e6;      // twin cavity bandwidth (FWHM)
    double pump_transmission = 0.03;    // input mirror, 532 nm
    double twin_transmission = 0.04;    // output mirror, 1064 nm
    double pump_spurious_loss = 0.0;    // extra round-trip loss, 532 nm
    double twin_spurious_loss = 0.005;  // extra round-trip loss, 1064 nm (AR surface, two passes)
    double excess_pump_phase_noise = 0.0;  // S_q0^in, shot-noise units above vacuum
    double eta_twin = 1.0;         // twin detection efficiency
    double eta_pump = 1.0;         // pump detection efficiency
    bool coupling = true;          // false: parametric interaction switched off
    double threshold_power_mw = 12.0;             // metadata
    std::array<double, 3> optical_freqs_hz{0, 0, 0};  // metadata, w0 = w1 + w2

    void validate() const;

    // Rates in units of the twin total decay rate.
    double total_twin_loss() const { return twin_transmission + twin_spurious_loss; }
    double gamma_ratio() const {  // pump total / twin total
        return (pump_transmission + pump_spurious_loss) / total_twin_loss();
    }
    double pump_coupling_rate() const { return pump_transmission / total_twin_loss(); }
    double pump_loss_rate() const { return pump_spurious_loss / total_twin_loss(); }
    double twin_coupling_rate() const { return twin_transmission / total_twin_loss(); }
    double twin_loss_rate() const { return twin_spurious_loss / total_twin_loss(); }

    /// Analysis frequency in twin half-bandwidth units.
    double scaled_frequency(double omega_hz) const { return omega_hz / (0.5 * bw_twin_hz); }
};

/// Classical intracavity operating point; amplitudes carry the parametric
/// coupling constant (g alpha_j), so |signal| = sqrt of the scaled twin
/// intensity and |pump| is clamped at sqrt(1 + delta^2) when oscillating.
struct SteadyState {
    std::complex<double> pump{0.0, 0.0};
    std::complex<double> signal{0.0, 0.0};
    std::complex<double> idler{0.0, 0.0};
    bool oscillating = false;
};

SteadyState steady_state(const OpoParams& params);

/// Detected-field 6x6 spectral covariance at the given analysis frequency,
/// from the linearized fluctuation equations and input-output theory.
/// Detection losses (eta_twin, eta_pump) are already applied.
/// Throws below_threshold_error when coupling is on and sigma < threshold.
SpectralCovariance spectral_covariance(const OpoParams& params, double omega_hz);

/// Beam-splitter detection loss: per-mode S -> eta S + (1 - eta) I, cross
/// blocks scaled by sqrt(eta_a eta_b).
SpectralCovariance apply_detection_loss(const SpectralCovariance& cov,
                                        double eta_twin, double eta_pump);

/// Ensemble of simulated output quadrature time series (pre-detection-loss,
/// shot-noise units, channel order p0,q0,p1,q1,p2,q2, time step dt in twin
/// half-bandwidth units).
struct TrajectoryEnsemble {
    double dt = 0.0;
    std::vector<Eigen::Matrix<double, 6, Eigen::Dynamic>> trajectories;
};

/// Euler-Maruyama integration of the linearized Langevin equations.
/// dt and duration are in twin half-bandwidth time units; trajectory i derives
/// its noise stream from (seed, i) only. Throws invalid_input when dt does not
/// resolve the fastest rate (dt > 0.05 / max rate).
TrajectoryEnsemble simulate_trajectories(const OpoParams& params, double dt,
                                         double duration, int n_traj,
                                         std::uint64_t seed);

struct McCovariance {
    SpectralCovariance covariance;   // detection losses applied
    Mat6 std_error = Mat6::Zero();   // per-entry standard error over trajectories
    int n_traj = 0;
};

struct McSettings {
    double dt = 0.002;
    double duration = 1000.0;
    int n_traj = 200;
    std::uint64_t seed = 1;
    double segment_time = 128.0;  // Welch segment length, Hann window, 50% overlap
};

/// Monte Carlo estimate of the detected spectral covariance at omega_hz;
/// the independent cross-check for spectral_covariance. Streams trajectories,
/// so memory stays bounded.
McCovariance monte_carlo_covariance(const OpoParams& params, double omega_hz,
                                    const McSettings& settings);

/// Welch cross-spectral estimate from a stored ensemble (no detection loss).
McCovariance estimate_covariance(const TrajectoryEnsemble& ensemble, double scaled_omega,
                                 double segment_time = 64.0);

}  // namespace tricorr

#endif
