// tricorr: simulate three-color OPO spectra, generate detuning scans and
// pump-power sweeps, synthesize/demodulate traces, evaluate correlation
// criteria, and fit model parameters. CSV in, CSV out.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tricorr/analysis_cavity.hpp"
#include "tricorr/config.hpp"
#include "tricorr/dsp.hpp"
#include "tricorr/errors.hpp"
#include "tricorr/fit.hpp"
#include "tricorr/opo_model.hpp"
#include "tricorr/quadratures.hpp"
#include "tricorr/rng.hpp"

using namespace tricorr;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value, win over the config file
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--config", c.config_path, "key=value configuration file");
    cmd->add_option("--set", c.overrides, "override a config key (key=value), repeatable");
    cmd->add_option("--seed", c.seed, "random seed (unsigned 64-bit), wins over config");
}

RunConfig load_config(const CommonOpts& c) {
    RunConfig cfg;
    if (!c.config_path.empty()) cfg = RunConfig::from_file(c.config_path);
    for (const std::string& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("--set expects key=value, got '" + kv + "'");
        cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) throw config_error("n_points must be >= 2");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

std::string trimmed(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r\n") - a + 1);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open input file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Projected covariance of (p0, q+, p-) in shot units.
Eigen::Matrix3d moment_target(const SpectralCovariance& cov) {
    Eigen::Matrix<double, 3, 6> w;
    w.row(0) = p_pump_selector().transpose();
    w.row(1) = q_plus_selector().transpose();
    w.row(2) = p_minus_selector().transpose();
    return w * cov.matrix * w.transpose();
}

int cmd_scan(const CommonOpts& common, double lo, double hi, int n,
             const std::string& out) {
    const RunConfig cfg = load_config(common);
    const SpectralCovariance cov =
        spectral_covariance(cfg.opo, cfg.cavity.analysis_freq_hz);
    const TwinBeamBlocks beams = twin_blocks_from(cov);
    const auto rows = scan_curve(beams, linspace(lo, hi, n), cfg.cavity);
    write_file_atomic(out, to_csv(rows));
    std::printf("wrote %s (%d detunings)\n", out.c_str(), n);
    return 0;
}

int cmd_fig3(const CommonOpts& common, double lo, double hi, int n,
             const std::string& out) {
    const RunConfig cfg = load_config(common);
    SigmaScanData data =
        predict_sigma_scan(cfg.opo, linspace(lo, hi, n), cfg.cavity.analysis_freq_hz);
    write_file_atomic(out, to_csv(data));
    std::printf("wrote %s (%d sigma points)\n", out.c_str(), n);
    return 0;
}

int cmd_traces(const CommonOpts& common, std::size_t n_samples_flag,
               const std::string& out) {
    const RunConfig cfg = load_config(common);
    const std::size_t n = n_samples_flag ? n_samples_flag : cfg.n_samples;
    const SpectralCovariance cov =
        spectral_covariance(cfg.opo, cfg.cavity.analysis_freq_hz);
    BasebandTrace t =
        synthesize_baseband(moment_target(cov), n, cfg.sample_rate_hz, cfg.seed);
    t.analysis_freq_hz = cfg.cavity.analysis_freq_hz;
    // Channel semantics for this window: pump->p0, signal->q+, idler->p-.
    write_file_atomic(out, to_csv(t, "moments"));
    std::printf("wrote %s (%zu samples)\n", out.c_str(), n);
    return 0;
}

int cmd_demod(const CommonOpts& common, const std::string& in,
              double lo_phase, const std::string& out) {
    const RunConfig cfg = load_config(common);
    std::vector<double> rf;
    if (!in.empty()) {
        std::stringstream ss(read_text(in));
        std::string line;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#' || line.rfind("index", 0) == 0) continue;
            const auto comma = line.find(',');
            const std::string v = comma == std::string::npos ? line : line.substr(comma + 1);
            try {
                rf.push_back(std::stod(v));
            } catch (const std::exception&) {
                throw config_error("rf input line " + std::to_string(lineno) +
                                   ": not a number: " + v);
            }
        }
        if (rf.empty()) throw config_error("rf input file has no samples");
    } else {
        // Shot-noise-limited RF fixture: white noise of unit two-sided density.
        Rng rng(cfg.seed);
        rf.resize(cfg.n_samples);
        const double sd = std::sqrt(cfg.rf_rate_hz);
        for (auto& x : rf) x = sd * rng.gaussian();
    }
    const std::vector<double> bb = demodulate(rf, cfg.rf_rate_hz,
                                              cfg.cavity.analysis_freq_hz, lo_phase,
                                              cfg.sample_rate_hz);
    std::string csv = "index,value\n";
    for (std::size_t i = 0; i < bb.size(); ++i)
        csv += std::to_string(i) + "," + format_number(bb[i]) + "\n";
    write_file_atomic(out, csv);
    std::printf("wrote %s (%zu baseband samples)\n", out.c_str(), bb.size());
    return 0;
}

MomentEstimate moments_from_file(const std::string& path) {
    MomentEstimate m;
    std::stringstream ss(read_text(path));
    std::string line;
    int lineno = 0;
    bool any = false;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("moments line " + std::to_string(lineno) +
                               ": expected key=value");
        const std::string key = trimmed(line.substr(0, eq));
        double value = 0.0;
        try {
            value = std::stod(trimmed(line.substr(eq + 1)));
        } catch (const std::exception&) {
            throw config_error("moments line " + std::to_string(lineno) +
                               ": bad value for " + key);
        }
        if (key == "var_p_minus") m.var_p_minus = value;
        else if (key == "var_q_plus") m.var_q_plus = value;
        else if (key == "var_p_pump") m.var_p_pump = value;
        else if (key == "cov_p0_qplus") m.cov_p0_qplus = value;
        else if (key == "n_samples") m.n_samples = static_cast<std::size_t>(value);
        else throw config_error("moments line " + std::to_string(lineno) +
                                ": unknown key '" + key + "'");
        any = true;
    }
    if (!any) throw config_error("moments file is empty: " + path);
    if (m.n_samples >= 2) {
        const double f = std::sqrt(2.0 / static_cast<double>(m.n_samples - 1));
        m.se_var_p_minus = m.var_p_minus * f;
        m.se_var_q_plus = m.var_q_plus * f;
        m.se_var_p_pump = m.var_p_pump * f;
        m.se_cov_p0_qplus =
            std::sqrt((m.var_p_pump * m.var_q_plus + m.cov_p0_qplus * m.cov_p0_qplus) /
                      static_cast<double>(m.n_samples - 1));
    }
    return m;
}

MomentEstimate moments_from_trace(const std::string& path) {
    std::string window;
    const BasebandTrace t = baseband_from_csv(read_text(path), &window);
    if (t.pump.size() < 2)
        throw config_error("trace has fewer than 2 samples: " + path);
    const double shot = block_variances(t.shot_ref,
                                        std::min<std::size_t>(1000, t.shot_ref.size()))
                            .mean();
    if (shot <= 0.0) throw config_error("trace shot-noise reference variance is zero");
    const double norm = std::sqrt(shot);
    std::vector<std::array<double, 3>> triples(t.pump.size());
    for (std::size_t i = 0; i < triples.size(); ++i)
        triples[i] = {t.pump[i] / norm, t.signal[i] / norm, t.idler[i] / norm};
    return estimate_moments(triples);
}

int cmd_criteria(const std::string& moments_path, const std::string& trace_path) {
    if (moments_path.empty() == trace_path.empty())
        throw config_error("criteria needs exactly one of --moments or --trace");
    const MomentEstimate m = moments_path.empty() ? moments_from_trace(trace_path)
                                                  : moments_from_file(moments_path);
    const CriteriaReport r = criteria_report(m);
    std::printf("var_p_minus=%s\n", format_number(r.var_p_minus).c_str());
    std::printf("var_q_plus=%s\n", format_number(r.var_q_plus).c_str());
    std::printf("alpha0=%s\n", format_number(r.alpha0).c_str());
    std::printf("beta0=%s\n", format_number(r.beta0).c_str());
    std::printf("var_q_plus_corrected=%s\n", format_number(r.var_q_plus_corrected).c_str());
    std::printf("duan_simon_value=%s\n", format_number(r.duan_simon_value).c_str());
    std::printf("vlf_value=%s\n", format_number(r.vlf_value).c_str());
    if (r.stat_errors) {
        std::printf("se_var_q_plus=%s\n", format_number(r.stat_errors->var_q_plus).c_str());
        std::printf("se_beta0=%s\n", format_number(r.stat_errors->beta0).c_str());
    }
    std::printf("%s\n", (r.entangled_duan || r.entangled_vlf) ? "ENTANGLED" : "NOT ENTANGLED");
    std::printf("QUANTUM CORRELATION: %s\n", r.quantum_correlation ? "yes" : "no");
    return 0;
}

int cmd_fit(const CommonOpts& common, const std::string& data_path,
            std::vector<double> init, const std::string& out) {
    const RunConfig cfg = load_config(common);
    const SigmaScanData data = sigma_scan_from_csv(read_text(data_path));
    FitOptions opt;
    if (!init.empty()) {
        if (init.size() != 3)
            throw config_error("--init needs three values: delta0 delta s_q0");
        opt.init = {init[0], init[1], init[2]};
    }
    const FitResult r =
        fit_parameters(data, cfg.opo, cfg.cavity.analysis_freq_hz, opt);
    const std::string text = to_key_values(r);
    if (out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_file_atomic(out, text);
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-color OPO quantum correlation toolkit"};
    app.require_subcommand(1);

    CommonOpts c_scan, c_fig3, c_traces, c_demod, c_fit;
    double scan_lo = -3.0, scan_hi = 3.0;
    int scan_n = 121;
    std::string scan_out = "scan.csv";
    CLI::App* scan = app.add_subcommand("scan", "detuning scan of the analysis cavities");
    add_common(scan, c_scan);
    scan->add_option("--delta-min", scan_lo, "lowest cavity detuning");
    scan->add_option("--delta-max", scan_hi, "highest cavity detuning");
    scan->add_option("--n-points", scan_n, "grid size (>= 2)");
    scan->add_option("--out", scan_out, "output CSV path");

    double fig3_lo = 1.05, fig3_hi = 1.6;
    int fig3_n = 12;
    std::string fig3_out = "fig3.csv";
    CLI::App* fig3 = app.add_subcommand("fig3", "pump-power sweep of beta0 and phase-sum noise");
    add_common(fig3, c_fig3);
    fig3->add_option("--sigma-min", fig3_lo, "lowest pump power over threshold");
    fig3->add_option("--sigma-max", fig3_hi, "highest pump power over threshold");
    fig3->add_option("--n-points", fig3_n, "grid size (>= 2)");
    fig3->add_option("--out", fig3_out, "output CSV path");

    std::size_t traces_n = 0;
    std::string traces_out = "trace.csv";
    CLI::App* traces = app.add_subcommand("traces", "synthesize a baseband acquisition");
    add_common(traces, c_traces);
    traces->add_option("--n-samples", traces_n, "samples per channel (default from config)");
    traces->add_option("--out", traces_out, "output CSV path");

    std::string demod_in, demod_out = "demod.csv";
    double demod_phase = 0.0;
    CLI::App* demod = app.add_subcommand("demod", "demodulate an RF trace to baseband");
    add_common(demod, c_demod);
    demod->add_option("--in", demod_in, "RF samples CSV (index,value); white noise if absent");
    demod->add_option("--lo-phase", demod_phase, "local oscillator phase (radians)");
    demod->add_option("--out", demod_out, "output CSV path");

    std::string crit_moments, crit_trace;
    CLI::App* criteria = app.add_subcommand("criteria", "evaluate the correlation criteria");
    criteria->add_option("--moments", crit_moments, "key=value moments file");
    criteria->add_option("--trace", crit_trace, "baseband trace CSV");

    std::string fit_data, fit_out;
    std::vector<double> fit_init;
    CLI::App* fit = app.add_subcommand("fit", "fit detunings and pump excess noise");
    add_common(fit, c_fit);
    fit->add_option("--data", fit_data, "sigma-scan CSV")->required();
    fit->add_option("--init", fit_init, "initial (delta0 delta s_q0)")->expected(3);
    fit->add_option("--out", fit_out, "key=value output path (stdout if absent)");

    try {
        app.parse(argc, argv);
        if (scan->parsed()) return cmd_scan(c_scan, scan_lo, scan_hi, scan_n, scan_out);
        if (fig3->parsed()) return cmd_fig3(c_fig3, fig3_lo, fig3_hi, fig3_n, fig3_out);
        if (traces->parsed()) return cmd_traces(c_traces, traces_n, traces_out);
        if (demod->parsed()) return cmd_demod(c_demod, demod_in, demod_phase, demod_out);
        if (criteria->parsed()) return cmd_criteria(crit_moments, crit_trace);
        if (fit->parsed()) return cmd_fit(c_fit, fit_data, fit_init, fit_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const invalid_input& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const below_threshold_error& e) {
        std::fprintf(stderr, "model error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
