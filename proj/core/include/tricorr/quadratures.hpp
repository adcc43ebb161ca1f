#ifndef TRICORR_QUADRATURES_HPP
#define TRICORR_QUADRATURES_HPP

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <optional>
#include <span>

namespace tricorr {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Quadrature basis ordering, fixed project-wide:
//   (p0, q0, p1, q1, p2, q2) for pump / signal / idler.
// p is the amplitude quadrature, q the phase quadrature relative to each
// field's own carrier, normalized so the vacuum variance is 1.
enum Mode : int { kPump = 0, kSignal = 1, kIdler = 2 };

constexpr int p_index(Mode m) { return 2 * static_cast<int>(m); }
constexpr int q_index(Mode m) { return 2 * static_cast<int>(m) + 1; }

/// Weight vector selecting q+ = (q1 + q2)/sqrt(2).
Vec6 q_plus_selector();
/// Weight vector selecting p- = (p1 - p2)/sqrt(2).
Vec6 p_minus_selector();
/// Weight vector selecting p0.
Vec6 p_pump_selector();

/// Symmetric 6x6 quadrature noise matrix at one analysis frequency,
/// in shot-noise units (vacuum = identity).
struct SpectralCovariance {
    double frequency_hz = 0.0;
    Mat6 matrix = Mat6::Identity();

    static SpectralCovariance vacuum(double frequency_hz = 0.0);

    /// Throws invalid_input unless symmetric (1e-12), diagonal >= 0 and
    /// positive semidefinite (eigenvalues >= -1e-9).
    void validate() const;

    double var_p_minus() const;
    double var_q_plus() const;
    double var_p_pump() const;
    /// C_{p0 q+} = <dp0 dq+>
    double cov_p0_qplus() const;
    /// C_{q0 q+} = <dq0 dq+>
    double cov_q0_qplus() const;
};

/// w^T S w for an arbitrary linear quadrature combination.
double joint_quadrature_variance(const SpectralCovariance& cov, const Vec6& weights);

struct PumpCorrection {
    double alpha0 = 0.0;                 // C_{p0 q+} / Var p0
    double beta0 = 0.0;                  // C^2 / Var p0
    double var_q_plus_corrected = 0.0;   // Var q+ - beta0
};

/// Optimal pump-amplitude correction of the phase-sum noise.
/// Throws invalid_input when Var p0 <= 0.
PumpCorrection pump_correction(const SpectralCovariance& cov);

struct CriteriaErrors {
    double var_p_minus = 0.0;
    double var_q_plus = 0.0;
    double beta0 = 0.0;
    double var_q_plus_corrected = 0.0;
};

struct CriteriaReport {
    double var_p_minus = 0.0;
    double var_q_plus = 0.0;
    double alpha0 = 0.0;
    double beta0 = 0.0;
    double var_q_plus_corrected = 0.0;
    double duan_simon_value = 0.0;       // Var p- + Var q+
    double vlf_value = 0.0;              // Var p- + Var(q+ - alpha0 p0)
    bool entangled_duan = false;         // duan_simon_value < 2
    bool entangled_vlf = false;          // vlf_value < 2
    bool quantum_correlation = false;    // corrected < 1 and beta0 resolved nonzero
    std::optional<CriteriaErrors> stat_errors;
};

CriteriaReport criteria_report(const SpectralCovariance& cov);

/// Second moments of measured (p0, q+, p-) sample triples.
struct MomentEstimate {
    double var_p_minus = 0.0;
    double var_q_plus = 0.0;
    double var_p_pump = 0.0;
    double cov_p0_qplus = 0.0;
    std::size_t n_samples = 0;
    double se_var_p_minus = 0.0;
    double se_var_q_plus = 0.0;
    double se_var_p_pump = 0.0;
    double se_cov_p0_qplus = 0.0;
};

/// Unbiased (n-1) estimators with Gaussian variance-of-variance standard
/// errors. Throws invalid_input for fewer than 2 samples.
MomentEstimate estimate_moments(std::span<const std::array<double, 3>> p0_qplus_pminus);

/// Criteria evaluated from measured moments; carries standard errors and uses
/// |beta0| > 3 SE(beta0) as the nonzero test.
CriteriaReport criteria_report(const MomentEstimate& m);

}  // namespace tricorr

#endif
