#include "tricorr/analysis_cavity.hpp"

#include <cmath>

#include "tricorr/errors.hpp"

namespace tricorr {

namespace {

using std::complex;

// Unit-modulus reflection of a lossless single-ended cavity; the carrier
// phase increases with detuning and is pi on resonance.
complex<double> reflection(double delta) {
    return -complex<double>(1.0, 2.0 * delta) / complex<double>(1.0, -2.0 * delta);
}

struct Mixing {
    complex<double> a_p;  // output amplitude quadrature <- input p
    complex<double> a_q;  // output amplitude quadrature <- input q
};

Mixing mixing_coefficients(const CavityParams& params) {
    const ReflectionTriple r = carrier_sideband_response(params);
    const complex<double> carrier_phase = r.carrier / std::abs(r.carrier);
    const complex<double> cp = std::conj(carrier_phase);
    // p_out(W) = a_p p_in(W) + a_q q_in(W), quadratures relative to each
    // beam's own carrier.
    Mixing m;
    m.a_p = 0.5 * (cp * r.upper + std::conj(cp * r.lower));
    m.a_q = complex<double>(0, 0.5) * (cp * r.upper - std::conj(cp * r.lower));
    return m;
}

}  // namespace

void CavityParams::validate() const {
    if (bandwidth_hz <= 0.0)
        throw invalid_input("CavityParams: bandwidth must be positive");
    if (analysis_freq_hz <= 0.0)
        throw invalid_input("CavityParams: analysis frequency must be positive");
}

ReflectionTriple carrier_sideband_response(const CavityParams& params) {
    params.validate();
    const double w = params.sideband_offset();
    return ReflectionTriple{reflection(params.detuning),
                            reflection(params.detuning + w),
                            reflection(params.detuning - w)};
}

NoiseWeights rotation_weights(const CavityParams& params) {
    const Mixing m = mixing_coefficients(params);
    NoiseWeights w;
    w.w_p = std::norm(m.a_p);
    w.w_q = std::norm(m.a_q);
    w.w_pq = 2.0 * std::real(m.a_p * std::conj(m.a_q));
    return w;
}

double measured_noise(const QuadBlock& beam, const CavityParams& params) {
    if (beam.pp < 0.0 || beam.qq < 0.0 ||
        beam.pp * beam.qq - beam.pq * beam.pq < -1e-9)
        throw invalid_input("measured_noise: unphysical quadrature block");
    const NoiseWeights w = rotation_weights(params);
    return w.w_p * beam.pp + w.w_q * beam.qq + w.w_pq * beam.pq;
}

TwinBeamBlocks twin_blocks_from(const SpectralCovariance& cov) {
    const auto& s = cov.matrix;
    TwinBeamBlocks b;
    b.signal = {s(2, 2), s(3, 3), s(2, 3)};
    b.idler = {s(4, 4), s(5, 5), s(4, 5)};
    b.cross = {s(2, 4), s(2, 5), s(3, 4), s(3, 5)};
    return b;
}

std::vector<ScanRow> scan_curve(const TwinBeamBlocks& beams,
                                std::span<const double> delta_grid,
                                CavityParams params) {
    if (delta_grid.empty()) throw invalid_input("scan_curve: empty detuning grid");
    std::vector<ScanRow> rows;
    rows.reserve(delta_grid.size());
    for (double delta : delta_grid) {
        params.detuning = delta;
        const NoiseWeights w = rotation_weights(params);
        const double s1 = measured_noise(beams.signal, params);
        const double s2 = measured_noise(beams.idler, params);
        // Cross amplitude noise of the two reflected beams.
        const double c12 = w.w_p * beams.cross.pp + w.w_q * beams.cross.qq +
                           0.5 * w.w_pq * (beams.cross.pq + beams.cross.qp);
        rows.push_back(ScanRow{delta, 0.5 * (s1 + s2) + c12, 0.5 * (s1 + s2) - c12,
                               w.w_p, w.w_q});
    }
    return rows;
}

}  // namespace tricorr
