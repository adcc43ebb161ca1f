#include "tricorr/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tricorr/errors.hpp"

namespace tricorr {

SigmaScanData predict_sigma_scan(const OpoParams& params,
                                 std::span<const double> sigma_grid,
                                 double omega_hz) {
    SigmaScanData data;
    data.provenance = "model";
    data.points.reserve(sigma_grid.size());
    for (double sigma : sigma_grid) {
        OpoParams p = params;
        p.sigma = sigma;
        const SpectralCovariance cov = spectral_covariance(p, omega_hz);
        const PumpCorrection corr = pump_correction(cov);
        SigmaScanPoint pt;
        pt.sigma = sigma;
        pt.var_q_plus = cov.var_q_plus();
        pt.beta0 = corr.beta0;
        pt.var_q_plus_corrected = corr.var_q_plus_corrected;
        data.points.push_back(pt);
    }
    return data;
}

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> init, double step,
                          int max_iterations, double tolerance) {
    const int n = static_cast<int>(init.size());
    std::vector<std::vector<double>> x(n + 1, std::vector<double>(init.begin(), init.end()));
    for (int i = 0; i < n; ++i) x[i + 1][i] += step;
    std::vector<double> fx(n + 1);
    for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

    SimplexResult res;
    res.history.push_back(*std::min_element(fx.begin(), fx.end()));

    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        // Order vertices best..worst.
        std::vector<int> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> xs(n + 1);
        std::vector<double> fs(n + 1);
        for (int i = 0; i <= n; ++i) {
            xs[i] = x[idx[i]];
            fs[i] = fx[idx[i]];
        }
        x.swap(xs);
        fx.swap(fs);

        if (fx[n] - fx[0] <= tolerance) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) centroid[k] += x[i][k] / n;

        auto at = [&](double coeff) {
            std::vector<double> p(n);
            for (int k = 0; k < n; ++k)
                p[k] = centroid[k] + coeff * (x[n][k] - centroid[k]);
            return p;
        };

        const std::vector<double> xr = at(-1.0);
        const double fr = f(xr);
        if (fr < fx[0]) {
            const std::vector<double> xe = at(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            const std::vector<double> xc = at(fr < fx[n] ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                // Shrink toward the best vertex.
                for (int i = 1; i <= n; ++i) {
                    for (int k = 0; k < n; ++k)
                        x[i][k] = x[0][k] + 0.5 * (x[i][k] - x[0][k]);
                    fx[i] = f(x[i]);
                }
            }
        }
        const double best = *std::min_element(fx.begin(), fx.end());
        if (best < res.history.back()) res.history.push_back(best);
    }

    const auto bi = std::min_element(fx.begin(), fx.end()) - fx.begin();
    res.best = x[bi];
    res.value = fx[bi];
    res.iterations = iter;
    return res;
}

FitResult fit_parameters(const SigmaScanData& data, const OpoParams& fixed,
                         double omega_hz, const FitOptions& options) {
    if (data.points.size() < 4)
        throw invalid_input("fit_parameters: need at least 4 data points");
    {
        const double s0 = data.points.front().sigma;
        const bool degenerate = std::all_of(
            data.points.begin(), data.points.end(),
            [&](const SigmaScanPoint& p) { return p.sigma == s0; });
        if (degenerate) throw invalid_input("fit_parameters: all sigma values equal");
    }
    for (double v : {options.init[0], options.init[1]})
        if (std::abs(v) > options.detuning_bound)
            throw invalid_input("fit_parameters: init detuning outside bounds");
    if (options.init[2] < 0.0 || options.init[2] > options.s_q0_max)
        throw invalid_input("fit_parameters: init s_q0 outside bounds");

    std::vector<double> point_residuals(data.points.size(), 0.0);

    auto objective = [&](std::span<const double> p) -> double {
        const double d0 = p[0], d = p[1], s = p[2];
        double penalty = 0.0;
        auto pen = [&](double v, double lo, double hi) {
            if (v < lo) penalty += 1e6 * (lo - v) * (lo - v);
            if (v > hi) penalty += 1e6 * (v - hi) * (v - hi);
        };
        pen(d0, -options.detuning_bound, options.detuning_bound);
        pen(d, -options.detuning_bound, options.detuning_bound);
        pen(s, 0.0, options.s_q0_max);

        OpoParams model = fixed;
        model.delta0 = std::clamp(d0, -options.detuning_bound, options.detuning_bound);
        model.delta = std::clamp(d, -options.detuning_bound, options.detuning_bound);
        model.excess_pump_phase_noise = std::clamp(s, 0.0, options.s_q0_max);

        double total = 0.0;
        for (std::size_t i = 0; i < data.points.size(); ++i) {
            const SigmaScanPoint& pt = data.points[i];
            model.sigma = pt.sigma;
            const SpectralCovariance cov = spectral_covariance(model, omega_hz);
            const PumpCorrection corr = pump_correction(cov);
            const double wq = pt.err_q_plus > 0.0 ? pt.err_q_plus : 1.0;
            const double wb = pt.err_beta0 > 0.0 ? pt.err_beta0 : 1.0;
            const double rq = (cov.var_q_plus() - pt.var_q_plus) / wq;
            const double rb = (corr.beta0 - pt.beta0) / wb;
            point_residuals[i] = rq * rq + rb * rb;
            total += point_residuals[i];
        }
        return total + penalty;
    };

    SimplexResult run = nelder_mead(objective, options.init, 0.05,
                                    options.max_iterations, options.tolerance);
    // Restart once from the best vertex with a fresh simplex.
    SimplexResult rerun = nelder_mead(objective, run.best, 0.02,
                                      options.max_iterations, options.tolerance);

    SimplexResult best_run = rerun.value <= run.value ? rerun : run;
    // A detuning pinned at its bound marks a boundary basin; restart once more
    // from the interior to give the global basin a chance.
    const bool at_bound =
        std::abs(std::abs(best_run.best[0]) - options.detuning_bound) < 1e-3 ||
        std::abs(std::abs(best_run.best[1]) - options.detuning_bound) < 1e-3;
    int extra_iterations = 0;
    std::vector<double> extra_history;
    if (at_bound) {
        const std::vector<double> interior{
            0.0, 0.0, std::clamp(best_run.best[2], 0.0, options.s_q0_max)};
        SimplexResult retry = nelder_mead(objective, interior, 0.1,
                                          options.max_iterations, options.tolerance);
        extra_iterations = retry.iterations;
        extra_history = retry.history;
        if (retry.value < best_run.value) best_run = retry;
    }

    FitResult out;
    const SimplexResult& best = best_run;
    out.delta0 = std::clamp(best.best[0], -options.detuning_bound, options.detuning_bound);
    out.delta = std::clamp(best.best[1], -options.detuning_bound, options.detuning_bound);
    out.s_q0 = std::clamp(best.best[2], 0.0, options.s_q0_max);
    if (out.delta0 < 0.0) {  // gauge: flipping both detunings leaves spectra unchanged
        out.delta0 = -out.delta0;
        out.delta = -out.delta;
    }
    out.residual = best.value;
    out.iterations = run.iterations + rerun.iterations + extra_iterations;
    out.converged = run.converged || rerun.converged || (at_bound && best.converged);
    // Best-so-far log across all restarts (non-increasing by construction).
    std::vector<double> merged = run.history;
    merged.insert(merged.end(), rerun.history.begin(), rerun.history.end());
    merged.insert(merged.end(), extra_history.begin(), extra_history.end());
    for (double v : merged)
        if (out.residual_history.empty() || v < out.residual_history.back())
            out.residual_history.push_back(v);
    // Recompute per-point residuals at the reported optimum.
    std::array<double, 3> final_p{out.delta0, out.delta, out.s_q0};
    objective(final_p);
    out.point_residuals = point_residuals;
    return out;
}

}  // namespace tricorr
