#ifndef TRICORR_ANALYSIS_CAVITY_HPP
#define TRICORR_ANALYSIS_CAVITY_HPP

#include <complex>
#include <span>
#include <vector>

#include "tricorr/quadratures.hpp"

namespace tricorr {

/// A lossless over-coupled cavity used in reflection as a noise-ellipse
/// rotator. Detuning is in units of the cavity bandwidth (scan-axis convention).
struct CavityParams {
    double bandwidth_hz = 14e6;
    double detuning = 0.0;
    double analysis_freq_hz = 27e6;

    void validate() const;
    /// Sideband offset in bandwidth units.
    double sideband_offset() const { return analysis_freq_hz / bandwidth_hz; }
};

struct ReflectionTriple {
    std::complex<double> carrier;  // r(delta)
    std::complex<double> upper;    // r(delta + omega')
    std::complex<double> lower;    // r(delta - omega')
};

/// Amplitude reflection coefficients at the carrier and both noise sidebands;
/// unit modulus for the lossless single-port model.
ReflectionTriple carrier_sideband_response(const CavityParams& params);

/// How the reflected amplitude noise mixes the incident quadrature block:
/// S_out = w_p S_pp + w_q S_qq + w_pq S_pq. For a lossless cavity
/// w_p + w_q = 1, so vacuum maps to vacuum at every detuning.
struct NoiseWeights {
    double w_p = 1.0;
    double w_q = 0.0;
    double w_pq = 0.0;
};

NoiseWeights rotation_weights(const CavityParams& params);

/// One beam's 2x2 quadrature spectral block.
struct QuadBlock {
    double pp = 1.0;
    double qq = 1.0;
    double pq = 0.0;
};

/// Amplitude noise of the beam after reflection off the detuned cavity.
/// Throws invalid_input for an unphysical block (pp*qq - pq^2 < -1e-9).
double measured_noise(const QuadBlock& beam, const CavityParams& params);

/// Signal/idler blocks plus their cross-correlations.
struct TwinBeamBlocks {
    QuadBlock signal;
    QuadBlock idler;
    struct Cross {
        double pp = 0.0, pq = 0.0, qp = 0.0, qq = 0.0;
    } cross;
};

TwinBeamBlocks twin_blocks_from(const SpectralCovariance& cov);

struct ScanRow {
    double delta;
    double sum_noise;   // photocurrent sum channel, shot units
    double diff_noise;  // photocurrent difference channel
    double w_p;
    double w_q;
};

/// Synchronous detuning scan of both analysis cavities (detuning-scan curves for both photocurrent channels).
/// Throws invalid_input for an empty grid.
std::vector<ScanRow> scan_curve(const TwinBeamBlocks& beams,
                                std::span<const double> delta_grid,
                                CavityParams params);

}  // namespace tricorr

#endif
