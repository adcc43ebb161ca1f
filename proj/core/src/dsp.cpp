#include "tricorr/dsp.hpp"

#include <cmath>
#include <numeric>

#include "tricorr/errors.hpp"
#include "tricorr/rng.hpp"

namespace tricorr {

void BasebandTrace::validate() const {
    if (sample_rate_hz <= 0.0)
        throw invalid_input("BasebandTrace: sample_rate must be positive");
    const std::size_t n = pump.size();
    if (signal.size() != n || idler.size() != n || shot_ref.size() != n)
        throw invalid_input("BasebandTrace: channels must have equal length");
}

BasebandTrace synthesize_baseband(const Eigen::Matrix3d& target,
                                  std::size_t n_samples, double sample_rate_hz,
                                  std::uint64_t seed, double gain) {
    if ((target - target.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw invalid_input("synthesize_baseband: target covariance not symmetric");
    Eigen::LLT<Eigen::Matrix3d> llt(target);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(target);
        if (es.eigenvalues().minCoeff() < -1e-9)
            throw invalid_input("synthesize_baseband: target covariance not PSD");
    }
    Eigen::Matrix3d chol;
    if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
    } else {
        // Semi-definite targets (e.g. constant channels): eigendecomposition root.
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(target);
        chol = es.eigenvectors() *
               es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    BasebandTrace t;
    t.sample_rate_hz = sample_rate_hz;
    t.seed = seed;
    t.calibration_gain = gain;
    t.pump.resize(n_samples);
    t.signal.resize(n_samples);
    t.idler.resize(n_samples);
    t.shot_ref.resize(n_samples);

    Rng rng(seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Eigen::Vector3d z(rng.gaussian(), rng.gaussian(), rng.gaussian());
        const Eigen::Vector3d v = chol * z;
        t.pump[i] = gain * v[0];
        t.signal[i] = gain * v[1];
        t.idler[i] = gain * v[2];
        t.shot_ref[i] = gain * rng.gaussian();
    }
    return t;
}

namespace {

double bessel_i0(double x) {
    // Series; converges quickly for the beta values used here.
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= (x * x) / (4.0 * k * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

// Kaiser-windowed sinc low-pass. Passband 0.4 out_rate, stopband 0.5 out_rate,
// >= 60 dB attenuation.
std::vector<double> design_lowpass(double rf_rate, double out_rate) {
    const double attenuation_db = 60.0;
    const double transition = 0.1 * out_rate / rf_rate;  // normalized width
    const double beta = 0.1102 * (attenuation_db - 8.7);
    int taps = static_cast<int>(std::ceil((attenuation_db - 7.95) /
                                          (2.285 * 2.0 * M_PI * transition)));
    if (taps % 2 == 0) ++taps;
    const double fc = 0.45 * out_rate / rf_rate;  // transition-band center
    const int mid = taps / 2;
    std::vector<double> h(taps);
    const double i0b = bessel_i0(beta);
    for (int k = 0; k < taps; ++k) {
        const int m = k - mid;
        const double sinc =
            m == 0 ? 2.0 * fc : std::sin(2.0 * M_PI * fc * m) / (M_PI * m);
        const double r = static_cast<double>(m) / mid;
        h[k] = sinc * bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    }
    return h;
}

}  // namespace

std::vector<double> demodulate(std::span<const double> rf, double rf_rate_hz,
                               double nu_hz, double lo_phase, double out_rate_hz) {
    if (rf_rate_hz < 4.0 * nu_hz)
        throw invalid_input("demodulate: rf sample rate must be >= 4 nu");
    const double ratio = rf_rate_hz / out_rate_hz;
    const int decim = static_cast<int>(std::lround(ratio));
    if (decim < 1 || std::abs(ratio - decim) > 1e-9)
        throw invalid_input("demodulate: out_rate must divide the rf rate");

    const std::vector<double> h = design_lowpass(rf_rate_hz, out_rate_hz);
    // White input of unit two-sided PSD has per-sample variance rf_rate; the
    // mixer halves the in-band density, hence the factor 2.
    double hsq = 0.0;
    for (double v : h) hsq += v * v;
    const double gain = std::sqrt(2.0 / (rf_rate_hz * hsq));

    std::vector<double> mixed(rf.size());
    const double w = 2.0 * M_PI * nu_hz / rf_rate_hz;
    for (std::size_t k = 0; k < rf.size(); ++k)
        mixed[k] = rf[k] * std::cos(w * static_cast<double>(k) + lo_phase);

    const int taps = static_cast<int>(h.size());
    const int mid = taps / 2;
    std::vector<double> out;
    out.reserve(rf.size() / decim + 1);
    for (std::size_t center = 0; center < mixed.size();
         center += static_cast<std::size_t>(decim)) {
        double acc = 0.0;
        for (int k = 0; k < taps; ++k) {
            const std::ptrdiff_t idx =
                static_cast<std::ptrdiff_t>(center) + k - mid;
            if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(mixed.size()))
                acc += h[k] * mixed[idx];
        }
        out.push_back(gain * acc);
    }
    return out;
}

double VarianceSeries::mean() const {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

VarianceSeries block_variances(std::span<const double> channel,
                               std::size_t block_size) {
    if (block_size < 2) throw invalid_input("block_variances: block_size must be >= 2");
    if (channel.size() < block_size)
        throw invalid_input("block_variances: fewer samples than one block");
    VarianceSeries series;
    series.block_size = block_size;
    const std::size_t n_blocks = channel.size() / block_size;
    series.values.reserve(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double* blk = channel.data() + b * block_size;
        double mean = 0.0;
        for (std::size_t k = 0; k < block_size; ++k) mean += blk[k];
        mean /= static_cast<double>(block_size);
        double ss = 0.0;
        for (std::size_t k = 0; k < block_size; ++k) {
            const double d = blk[k] - mean;
            ss += d * d;
        }
        series.values.push_back(ss / static_cast<double>(block_size - 1));
    }
    return series;
}

VarianceSeries normalize_to_sql(const VarianceSeries& series,
                                const VarianceSeries& shot_series) {
    if (shot_series.values.empty())
        throw invalid_input("normalize_to_sql: empty shot-noise reference");
    const double sql = shot_series.mean();
    if (sql <= 0.0)
        throw invalid_input("normalize_to_sql: shot-noise reference mean must be positive");
    VarianceSeries out = series;
    for (double& v : out.values) v /= sql;
    out.normalized = true;
    out.sql_reference = sql;
    return out;
}

}  // namespace tricorr
