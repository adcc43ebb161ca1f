#ifndef TRICORR_DSP_HPP
#define TRICORR_DSP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace tricorr {

/// Demodulated photocurrent samples for one acquisition.
struct BasebandTrace {
    double sample_rate_hz = 600e3;
    double analysis_freq_hz = 27e6;
    std::uint64_t seed = 0;
    double calibration_gain = 1.0;
    std::vector<double> pump;
    std::vector<double> signal;
    std::vector<double> idler;
    std::vector<double> shot_ref;

    void validate() const;  // equal channel lengths, positive rate
};

/// Gaussian baseband fixture whose (pump, signal, idler) covariance in
/// shot-noise units (after dividing by the shot_ref variance) matches the
/// target. Deterministic under a fixed seed.
BasebandTrace synthesize_baseband(const Eigen::Matrix3d& target_shot_units,
                                  std::size_t n_samples, double sample_rate_hz,
                                  std::uint64_t seed, double gain = 1.0);

/// Lock-in demodulation: mix with cos(2 pi nu t + lo_phase), FIR low-pass,
/// decimate to out_rate. Gain is calibrated so white noise of unit two-sided
/// spectral density yields unit baseband variance.
/// Throws invalid_input when rf_rate < 4 nu or out_rate does not divide rf_rate.
std::vector<double> demodulate(std::span<const double> rf, double rf_rate_hz,
                               double nu_hz, double lo_phase, double out_rate_hz);

struct VarianceSeries {
    std::size_t block_size = 1000;
    std::vector<double> values;
    bool normalized = false;
    double sql_reference = 0.0;

    double mean() const;
};

/// Unbiased variance of consecutive non-overlapping blocks; a trailing
/// partial block is discarded. Throws invalid_input when the channel is
/// shorter than one block.
VarianceSeries block_variances(std::span<const double> channel,
                               std::size_t block_size = 1000);

/// Divide every value by the mean of the shot-noise reference series.
VarianceSeries normalize_to_sql(const VarianceSeries& series,
                                const VarianceSeries& shot_series);

}  // namespace tricorr

#endif
