#ifndef TRICORR_FIT_HPP
#define TRICORR_FIT_HPP

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tricorr/opo_model.hpp"

namespace tricorr {

struct SigmaScanPoint {
    double sigma = 0.0;
    double var_q_plus = 0.0;
    double beta0 = 0.0;
    double var_q_plus_corrected = 0.0;
    double err_q_plus = 0.0;  // 0 means unknown (unit fit weight)
    double err_beta0 = 0.0;
};

struct SigmaScanData {
    std::vector<SigmaScanPoint> points;
    std::string provenance;  // "measured" or "synthetic(seed=...,params=...)"
};

/// Model prediction of the pump-power sweep observables at the analysis
/// frequency. Throws below_threshold_error for grid values below threshold.
SigmaScanData predict_sigma_scan(const OpoParams& params,
                                 std::span<const double> sigma_grid,
                                 double omega_hz);

struct FitResult {
    double delta0 = 0.0;
    double delta = 0.0;
    double s_q0 = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // best value per accepted improvement
    std::vector<double> point_residuals;   // weighted squared residual per point
};

struct FitOptions {
    std::array<double, 3> init{0.0, 0.0, 10.0};  // delta0, delta, s_q0
    double detuning_bound = 1.0;                 // |detuning| <= bound
    double s_q0_max = 100.0;
    int max_iterations = 2000;
    double tolerance = 1e-12;
};

/// Weighted least-squares fit of (delta0, delta, s_q0) to measured
/// (beta0, var_q_plus) curves; derivative-free simplex search with one
/// restart from the best vertex. The sign of both detunings is gauge
/// freedom (spectra are invariant under flipping both); results are
/// canonicalized to delta0 >= 0.
FitResult fit_parameters(const SigmaScanData& data, const OpoParams& fixed,
                         double omega_hz, const FitOptions& options = {});

/// Generic Nelder-Mead minimizer used by fit_parameters; exposed for reuse.
struct SimplexResult {
    std::vector<double> best;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // best value whenever it improves
};

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> init, double step,
                          int max_iterations, double tolerance);

}  // namespace tricorr

#endif
