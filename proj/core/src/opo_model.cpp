#include "tricorr/opo_model.hpp"

#include <cmath>
#include <complex>

#include "tricorr/errors.hpp"
#include "tricorr/rng.hpp"

namespace tricorr {

namespace {

using Mat2 = Eigen::Matrix2d;
using CMat6 = Eigen::Matrix<std::complex<double>, 6, 6>;
using std::complex;

Mat2 rot(double a) {
    Mat2 r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

struct Port {
    int mode;       // 0,1,2
    double rate;    // decay rate through this port, twin units
    Mat2 ncov;      // input noise covariance in the cavity frame
    bool detected;  // measured output leaves through this port
};

// Linearized fluctuation model about the operating point, in the quadrature
// basis (p0,q0,p1,q1,p2,q2) referenced to the intracavity carrier phases.
struct LinearSystem {
    Mat6 drift = Mat6::Zero();
    std::array<Port, 6> ports;
    Eigen::Matrix<double, 6, 1> out_scale;  // sqrt(2 * coupling rate) per row
    Mat2 pump_out_rotation = Mat2::Identity();  // cavity frame -> output carrier frame
};

struct Operating {
    SteadyState state;
    double twin_intensity = 0.0;  // P = |g alpha_1|^2
    double pump_phase = 0.0;      // arg(alpha_0)
    double pump_out_phase = 0.0;  // arg of the reflected pump carrier
};

Operating solve_operating_point(const OpoParams& p) {
    const double gr = p.gamma_ratio();
    const double g0c = p.pump_coupling_rate();
    const double u = gr - p.delta0 * p.delta;
    const double v = -(p.delta0 + gr * p.delta);
    const double mod2 = u * u + v * v;

    Operating op;
    if (!p.coupling || p.sigma < 1.0) {
        // Below threshold (or passive): twins empty, pump filled linearly.
        const double drive = std::sqrt(p.sigma * mod2);
        const complex<double> denom(gr, -p.delta0);
        op.state.pump = drive / denom;
        op.state.oscillating = false;
        op.pump_phase = std::arg(op.state.pump);
        const complex<double> out =
            std::sqrt(2.0 * g0c) * op.state.pump - drive / std::sqrt(2.0 * g0c);
        op.pump_out_phase = std::abs(out) > 1e-12 ? std::arg(out) : op.pump_phase;
        return op;
    }

    // Above threshold: twin intensity from the pump equation modulus,
    // sigma is power over the detuned threshold.
    const double P = -u + std::sqrt(p.sigma * mod2 - v * v);
    const double phi = -std::arg(complex<double>(u + P, v));
    const complex<double> a0 = complex<double>(1.0, -p.delta) * std::exp(complex<double>(0, phi));
    const double theta = 0.5 * phi;  // common twin phase; the difference is free, set 0
    const complex<double> twin = std::sqrt(P) * std::exp(complex<double>(0, theta));

    op.state.pump = a0;
    op.state.signal = twin;
    op.state.idler = twin;
    op.state.oscillating = true;
    op.twin_intensity = P;
    op.pump_phase = std::arg(a0);
    const double drive = std::sqrt(p.sigma * mod2);
    const complex<double> out = std::sqrt(2.0 * g0c) * a0 - drive / std::sqrt(2.0 * g0c);
    op.pump_out_phase = std::abs(out) > 1e-12 ? std::arg(out) : op.pump_phase;
    return op;
}

LinearSystem build_linear_system(const OpoParams& p) {
    p.validate();
    const Operating op = solve_operating_point(p);
    if (p.coupling && !op.state.oscillating)
        throw below_threshold_error("OPO below oscillation threshold (sigma < 1)");

    const double gr = p.gamma_ratio();
    LinearSystem sys;
    Mat6& A = sys.drift;

    A.block<2, 2>(0, 0) << -gr, -p.delta0, p.delta0, -gr;
    for (int j = 1; j <= 2; ++j)
        A.block<2, 2>(2 * j, 2 * j) << -1.0, -p.delta, p.delta, -1.0;

    if (p.coupling && op.state.oscillating) {
        const double sp = std::sqrt(op.twin_intensity);
        const double z = std::atan(p.delta);
        for (int j = 1; j <= 2; ++j) {
            A.block<2, 2>(0, 2 * j) = -sp * rot(z);
            A.block<2, 2>(2 * j, 0) = sp * rot(-z);
        }
        Mat2 tt;
        tt << 1.0, -p.delta, -p.delta, -1.0;
        A.block<2, 2>(2, 4) = tt;
        A.block<2, 2>(4, 2) = tt;
    }

    // Excess pump phase noise rides on the input carrier (phase 0); express it
    // in the intracavity pump frame.
    Mat2 pump_in = rot(-op.pump_phase) *
                   Eigen::Vector2d(1.0, 1.0 + p.excess_pump_phase_noise).asDiagonal() *
                   rot(-op.pump_phase).transpose();

    sys.ports = {Port{0, p.pump_coupling_rate(), pump_in, true},
                 Port{0, p.pump_loss_rate(), Mat2::Identity(), false},
                 Port{1, p.twin_coupling_rate(), Mat2::Identity(), true},
                 Port{1, p.twin_loss_rate(), Mat2::Identity(), false},
                 Port{2, p.twin_coupling_rate(), Mat2::Identity(), true},
                 Port{2, p.twin_loss_rate(), Mat2::Identity(), false}};

    const double so_pump = std::sqrt(2.0 * p.pump_coupling_rate());
    const double so_twin = std::sqrt(2.0 * p.twin_coupling_rate());
    sys.out_scale << so_pump, so_pump, so_twin, so_twin, so_twin, so_twin;
    sys.pump_out_rotation = rot(op.pump_phase - op.pump_out_phase);
    return sys;
}

Mat6 rotate_pump_block(const Mat6& s, const Mat2& r) {
    Mat6 rb = Mat6::Identity();
    rb.block<2, 2>(0, 0) = r;
    return rb * s * rb.transpose();
}

}  // namespace

void OpoParams::validate() const {
    if (sigma <= 0.0) throw invalid_input("OpoParams: sigma must be positive");
    if (bw_twin_hz <= 0.0) throw invalid_input("OpoParams: bw_twin_hz must be positive");
    if (pump_transmission <= 0.0 || pump_transmission > 1.0)
        throw invalid_input("OpoParams: pump_transmission out of (0, 1]");
    if (twin_transmission <= 0.0 || twin_transmission > 1.0)
        throw invalid_input("OpoParams: twin_transmission out of (0, 1]");
    if (pump_spurious_loss < 0.0 || twin_spurious_loss < 0.0)
        throw invalid_input("OpoParams: spurious losses must be >= 0");
    if (excess_pump_phase_noise < 0.0)
        throw invalid_input("OpoParams: excess_pump_phase_noise must be >= 0");
    if (eta_twin < 0.0 || eta_twin > 1.0)
        throw invalid_input("OpoParams: eta_twin out of [0, 1]");
    if (eta_pump < 0.0 || eta_pump > 1.0)
        throw invalid_input("OpoParams: eta_pump out of [0, 1]");
    const auto& w = optical_freqs_hz;
    if ((w[0] != 0.0 || w[1] != 0.0 || w[2] != 0.0) && w[0] != w[1] + w[2])
        throw invalid_input("OpoParams: optical frequencies must satisfy w0 = w1 + w2");
}

SteadyState steady_state(const OpoParams& params) {
    params.validate();
    return solve_operating_point(params).state;
}

SpectralCovariance spectral_covariance(const OpoParams& params, double omega_hz) {
    const LinearSystem sys = build_linear_system(params);
    const double w = params.scaled_frequency(omega_hz);

    CMat6 denom = sys.drift.cast<complex<double>>();
    denom += complex<double>(0.0, w) * CMat6::Identity();
    const CMat6 green = -denom.inverse();

    // Transfer from the 12 port noises to the 6 detected output quadratures.
    Eigen::Matrix<complex<double>, 6, 12> transfer =
        Eigen::Matrix<complex<double>, 6, 12>::Zero();
    Eigen::Matrix<double, 12, 12> ncov = Eigen::Matrix<double, 12, 12>::Zero();
    for (int k = 0; k < 6; ++k) {
        const Port& port = sys.ports[k];
        Eigen::Matrix<double, 6, 2> inject = Eigen::Matrix<double, 6, 2>::Zero();
        inject.block<2, 2>(2 * port.mode, 0) = Mat2::Identity();
        Eigen::Matrix<complex<double>, 6, 2> blk =
            sys.out_scale.asDiagonal() *
            (green * (std::sqrt(2.0 * port.rate) * inject.cast<complex<double>>()));
        if (port.detected) blk -= inject.cast<complex<double>>();
        transfer.block<6, 2>(0, 2 * k) = blk;
        ncov.block<2, 2>(2 * k, 2 * k) = port.ncov;
    }

    const CMat6 s_herm = transfer * ncov.cast<complex<double>>() * transfer.adjoint();
    Mat6 s = 0.5 * (s_herm + s_herm.adjoint()).real();
    s = rotate_pump_block(s, sys.pump_out_rotation);
    s = 0.5 * (s + s.transpose()).eval();

    SpectralCovariance cov{omega_hz, s};
    return apply_detection_loss(cov, params.eta_twin, params.eta_pump);
}

SpectralCovariance apply_detection_loss(const SpectralCovariance& cov,
                                        double eta_twin, double eta_pump) {
    if (eta_twin < 0.0 || eta_twin > 1.0 || eta_pump < 0.0 || eta_pump > 1.0)
        throw invalid_input("apply_detection_loss: efficiencies must be in [0, 1]");
    Vec6 scale;
    const double sp = std::sqrt(eta_pump);
    const double st = std::sqrt(eta_twin);
    scale << sp, sp, st, st, st, st;
    Mat6 s = scale.asDiagonal() * cov.matrix * scale.asDiagonal();
    s += (Vec6::Ones() - scale.cwiseProduct(scale)).asDiagonal().toDenseMatrix();
    return SpectralCovariance{cov.frequency_hz, s};
}

namespace {

double fastest_rate(const OpoParams& p, const LinearSystem& sys) {
    double r = std::max(1.0 + std::abs(p.delta), p.gamma_ratio() + std::abs(p.delta0));
    r = std::max(r, 2.0);  // twin sum/difference modes decay at up to 2
    r = std::max(r, 2.0 * std::abs(sys.drift.block<2, 2>(2, 0).norm()));
    return r;
}

// One Euler-Maruyama trajectory of the output quadratures.
void run_trajectory(const LinearSystem& sys, double dt, int n_steps, int burn_steps,
                    Rng& rng, Eigen::Matrix<double, 6, Eigen::Dynamic>& out) {
    Vec6 x = Vec6::Zero();
    const double sdt = std::sqrt(dt);
    const double inv_sdt = 1.0 / sdt;

    std::array<Eigen::Matrix2d, 6> chol;
    std::array<double, 6> drive{};
    for (int k = 0; k < 6; ++k) {
        chol[k] = Eigen::LLT<Mat2>(sys.ports[k].ncov).matrixL();
        drive[k] = std::sqrt(2.0 * sys.ports[k].rate);
    }

    out.resize(6, n_steps);
    for (int step = -burn_steps; step < n_steps; ++step) {
        Vec6 kick = Vec6::Zero();
        Vec6 in_noise = Vec6::Zero();  // detected-port noises, scaled by 1/sqrt(dt)
        for (int k = 0; k < 6; ++k) {
            const Port& port = sys.ports[k];
            if (port.rate == 0.0) continue;
            Eigen::Vector2d n(rng.gaussian(), rng.gaussian());
            n = chol[k] * n;
            kick.segment<2>(2 * port.mode) += drive[k] * sdt * n;
            if (port.detected) in_noise.segment<2>(2 * port.mode) = n * inv_sdt;
        }
        if (step >= 0) {
            Vec6 y = sys.out_scale.cwiseProduct(x) - in_noise;
            y.segment<2>(0) = sys.pump_out_rotation * y.segment<2>(0);
            out.col(step) = y;
        }
        x += dt * (sys.drift * x) + kick;
    }
}

// Welch cross-spectral matrix at one frequency: Hann window, 50% overlap.
Mat6 welch_covariance(const Eigen::Matrix<double, 6, Eigen::Dynamic>& y, double dt,
                      double scaled_omega, double segment_time) {
    const int n = static_cast<int>(y.cols());
    int seg = static_cast<int>(std::lround(segment_time / dt));
    seg = std::min(seg, n);
    if (seg < 8) throw invalid_input("welch_covariance: trajectory too short");
    const int hop = seg / 2;

    Eigen::VectorXd window(seg);
    double wsq = 0.0;
    for (int k = 0; k < seg; ++k) {
        window[k] = 0.5 * (1.0 - std::cos(2.0 * M_PI * (k + 0.5) / seg));
        wsq += window[k] * window[k];
    }
    Eigen::VectorXcd phase(seg);
    for (int k = 0; k < seg; ++k)
        phase[k] = std::exp(std::complex<double>(0.0, -scaled_omega * k * dt)) * window[k];

    Mat6 acc = Mat6::Zero();
    int n_segs = 0;
    for (int start = 0; start + seg <= n; start += hop) {
        Eigen::Matrix<std::complex<double>, 6, 1> amp =
            Eigen::Matrix<std::complex<double>, 6, 1>::Zero();
        for (int k = 0; k < seg; ++k)
            amp += phase[k] * y.col(start + k).cast<std::complex<double>>();
        amp *= dt;
        const auto outer = (amp * amp.adjoint()).eval();
        acc += outer.real();
        ++n_segs;
    }
    if (n_segs == 0) throw invalid_input("welch_covariance: no full segment fits");
    return acc / (n_segs * dt * wsq);
}

}  // namespace

TrajectoryEnsemble simulate_trajectories(const OpoParams& params, double dt,
                                         double duration, int n_traj,
                                         std::uint64_t seed) {
    const LinearSystem sys = build_linear_system(params);
    if (n_traj < 1) throw invalid_input("simulate_trajectories: n_traj must be >= 1");
    if (dt <= 0.0 || dt > 0.05 / fastest_rate(params, sys))
        throw invalid_input("simulate_trajectories: dt does not resolve the fastest rate");
    const int n_steps = static_cast<int>(std::lround(duration / dt));
    if (n_steps < 1) throw invalid_input("simulate_trajectories: duration too short");
    const int burn_steps = static_cast<int>(std::lround(std::min(20.0, 0.2 * duration) / dt));

    TrajectoryEnsemble ens;
    ens.dt = dt;
    ens.trajectories.resize(n_traj);
    for (int i = 0; i < n_traj; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        run_trajectory(sys, dt, n_steps, burn_steps, rng, ens.trajectories[i]);
    }
    return ens;
}

McCovariance estimate_covariance(const TrajectoryEnsemble& ensemble, double scaled_omega,
                                 double segment_time) {
    if (ensemble.trajectories.empty())
        throw invalid_input("estimate_covariance: empty ensemble");
    Mat6 sum = Mat6::Zero();
    Mat6 sumsq = Mat6::Zero();
    for (const auto& y : ensemble.trajectories) {
        const Mat6 s = welch_covariance(y, ensemble.dt, scaled_omega, segment_time);
        sum += s;
        sumsq += s.cwiseProduct(s);
    }
    const double n = static_cast<double>(ensemble.trajectories.size());
    McCovariance out;
    out.n_traj = static_cast<int>(n);
    Mat6 mean = sum / n;
    out.covariance = SpectralCovariance{0.0, 0.5 * (mean + mean.transpose())};
    if (n > 1)
        out.std_error =
            ((sumsq / n - mean.cwiseProduct(mean)).cwiseMax(0.0) / (n - 1.0)).cwiseSqrt();
    return out;
}

McCovariance monte_carlo_covariance(const OpoParams& params, double omega_hz,
                                    const McSettings& settings) {
    const LinearSystem sys = build_linear_system(params);
    if (settings.dt <= 0.0 || settings.dt > 0.05 / fastest_rate(params, sys))
        throw invalid_input("monte_carlo_covariance: dt does not resolve the fastest rate");
    if (settings.n_traj < 2)
        throw invalid_input("monte_carlo_covariance: need at least 2 trajectories");
    const double w = params.scaled_frequency(omega_hz);
    const int n_steps = static_cast<int>(std::lround(settings.duration / settings.dt));
    const int burn_steps =
        static_cast<int>(std::lround(std::min(20.0, 0.2 * settings.duration) / settings.dt));

    Mat6 sum = Mat6::Zero();
    Mat6 sumsq = Mat6::Zero();
    Eigen::Matrix<double, 6, Eigen::Dynamic> traj;
    for (int i = 0; i < settings.n_traj; ++i) {
        Rng rng = Rng::substream(settings.seed, static_cast<std::uint64_t>(i));
        run_trajectory(sys, settings.dt, n_steps, burn_steps, rng, traj);
        Mat6 raw = welch_covariance(traj, settings.dt, w, settings.segment_time);
        raw = 0.5 * (raw + raw.transpose()).eval();
        const SpectralCovariance lossy = apply_detection_loss(
            SpectralCovariance{omega_hz, raw}, params.eta_twin, params.eta_pump);
        sum += lossy.matrix;
        sumsq += lossy.matrix.cwiseProduct(lossy.matrix);
    }
    const double n = static_cast<double>(settings.n_traj);
    McCovariance out;
    out.n_traj = settings.n_traj;
    const Mat6 mean = sum / n;
    out.covariance = SpectralCovariance{omega_hz, mean};
    out.std_error =
        ((sumsq / n - mean.cwiseProduct(mean)).cwiseMax(0.0) / (n - 1.0)).cwiseSqrt();
    return out;
}

}  // namespace tricorr
