#include "tricorr/quadratures.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "tricorr/errors.hpp"

namespace tricorr {

namespace {
constexpr double kSqrtHalf = 0.70710678118654752440;
}

Vec6 q_plus_selector() {
    Vec6 w = Vec6::Zero();
    w[q_index(kSignal)] = kSqrtHalf;
    w[q_index(kIdler)] = kSqrtHalf;
    return w;
}

Vec6 p_minus_selector() {
    Vec6 w = Vec6::Zero();
    w[p_index(kSignal)] = kSqrtHalf;
    w[p_index(kIdler)] = -kSqrtHalf;
    return w;
}

Vec6 p_pump_selector() {
    Vec6 w = Vec6::Zero();
    w[p_index(kPump)] = 1.0;
    return w;
}

SpectralCovariance SpectralCovariance::vacuum(double frequency_hz) {
    return SpectralCovariance{frequency_hz, Mat6::Identity()};
}

void SpectralCovariance::validate() const {
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw invalid_input("SpectralCovariance: matrix not symmetric");
    if (matrix.diagonal().minCoeff() < 0.0)
        throw invalid_input("SpectralCovariance: negative diagonal entry");
    Eigen::SelfAdjointEigenSolver<Mat6> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw invalid_input("SpectralCovariance: matrix not positive semidefinite");
}

double SpectralCovariance::var_p_minus() const {
    return joint_quadrature_variance(*this, p_minus_selector());
}

double SpectralCovariance::var_q_plus() const {
    return joint_quadrature_variance(*this, q_plus_selector());
}

double SpectralCovariance::var_p_pump() const {
    return matrix(p_index(kPump), p_index(kPump));
}

double SpectralCovariance::cov_p0_qplus() const {
    return kSqrtHalf * (matrix(p_index(kPump), q_index(kSignal)) +
                        matrix(p_index(kPump), q_index(kIdler)));
}

double SpectralCovariance::cov_q0_qplus() const {
    return kSqrtHalf * (matrix(q_index(kPump), q_index(kSignal)) +
                        matrix(q_index(kPump), q_index(kIdler)));
}

double joint_quadrature_variance(const SpectralCovariance& cov, const Vec6& weights) {
    return weights.dot(cov.matrix * weights);
}

PumpCorrection pump_correction(const SpectralCovariance& cov) {
    const double var_p0 = cov.var_p_pump();
    if (var_p0 <= 0.0)
        throw invalid_input("pump_correction: Var p0 must be positive");
    const double c = cov.cov_p0_qplus();
    PumpCorrection out;
    out.alpha0 = c / var_p0;
    out.beta0 = c * c / var_p0;
    out.var_q_plus_corrected = cov.var_q_plus() - out.beta0;
    return out;
}

namespace {

CriteriaReport assemble_report(double var_p_minus, double var_q_plus, double var_p0,
                               double cov_p0_qplus, double beta0_threshold,
                               std::optional<CriteriaErrors> errors) {
    if (var_p0 <= 0.0)
        throw invalid_input("criteria_report: Var p0 must be positive");
    CriteriaReport r;
    r.var_p_minus = var_p_minus;
    r.var_q_plus = var_q_plus;
    r.alpha0 = cov_p0_qplus / var_p0;
    r.beta0 = cov_p0_qplus * cov_p0_qplus / var_p0;
    r.var_q_plus_corrected = var_q_plus - r.beta0;
    r.duan_simon_value = var_p_minus + var_q_plus;
    r.vlf_value = r.duan_simon_value - r.beta0;
    r.entangled_duan = r.duan_simon_value < 2.0;
    r.entangled_vlf = r.vlf_value < 2.0;
    r.quantum_correlation =
        r.var_q_plus_corrected < 1.0 && std::abs(r.beta0) > beta0_threshold;
    r.stat_errors = std::move(errors);
    return r;
}

}  // namespace

CriteriaReport criteria_report(const SpectralCovariance& cov) {
    cov.validate();
    return assemble_report(cov.var_p_minus(), cov.var_q_plus(), cov.var_p_pump(),
                           cov.cov_p0_qplus(), 1e-12, std::nullopt);
}

MomentEstimate estimate_moments(std::span<const std::array<double, 3>> samples) {
    const std::size_t n = samples.size();
    if (n < 2)
        throw invalid_input("estimate_moments: need at least 2 samples");

    double mean[3] = {0, 0, 0};
    for (const auto& s : samples)
        for (int k = 0; k < 3; ++k) mean[k] += s[k];
    for (double& m : mean) m /= static_cast<double>(n);

    double ss[3] = {0, 0, 0};
    double cross = 0.0;  // p0 with q+
    for (const auto& s : samples) {
        const double d0 = s[0] - mean[0];
        const double d1 = s[1] - mean[1];
        const double d2 = s[2] - mean[2];
        ss[0] += d0 * d0;
        ss[1] += d1 * d1;
        ss[2] += d2 * d2;
        cross += d0 * d1;
    }
    const double nm1 = static_cast<double>(n - 1);

    MomentEstimate m;
    m.n_samples = n;
    m.var_p_pump = ss[0] / nm1;
    m.var_q_plus = ss[1] / nm1;
    m.var_p_minus = ss[2] / nm1;
    m.cov_p0_qplus = cross / nm1;
    const double f = std::sqrt(2.0 / nm1);
    m.se_var_p_pump = m.var_p_pump * f;
    m.se_var_q_plus = m.var_q_plus * f;
    m.se_var_p_minus = m.var_p_minus * f;
    // Gaussian covariance estimator: Var(C) = (V_a V_b + C^2)/(n-1)
    m.se_cov_p0_qplus =
        std::sqrt((m.var_p_pump * m.var_q_plus + m.cov_p0_qplus * m.cov_p0_qplus) / nm1);
    return m;
}

CriteriaReport criteria_report(const MomentEstimate& m) {
    const double v0 = m.var_p_pump;
    const double c = m.cov_p0_qplus;
    CriteriaErrors e;
    e.var_p_minus = m.se_var_p_minus;
    e.var_q_plus = m.se_var_q_plus;
    // First-order propagation for beta0 = C^2 / V0.
    const double dbdc = v0 > 0.0 ? 2.0 * c / v0 : 0.0;
    const double dbdv = v0 > 0.0 ? -(c * c) / (v0 * v0) : 0.0;
    e.beta0 = std::sqrt(dbdc * dbdc * m.se_cov_p0_qplus * m.se_cov_p0_qplus +
                        dbdv * dbdv * m.se_var_p_pump * m.se_var_p_pump);
    e.var_q_plus_corrected = std::hypot(e.var_q_plus, e.beta0);

    const double threshold = e.beta0 > 0.0 ? 3.0 * e.beta0 : 1e-12;
    return assemble_report(m.var_p_minus, m.var_q_plus, v0, c, threshold, e);
}

}  // namespace tricorr
