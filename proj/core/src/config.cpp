#include "tricorr/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tricorr/errors.hpp"

namespace tricorr {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("invalid numeric value for key '" + key + "': " + v);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("invalid unsigned value for key '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw config_error("invalid boolean value for key '" + key + "': " + v);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "sigma") opo.sigma = parse_double(key, value);
    else if (key == "delta0") opo.delta0 = parse_double(key, value);
    else if (key == "delta") opo.delta = parse_double(key, value);
    else if (key == "bw_twin_hz") opo.bw_twin_hz = parse_double(key, value);
    else if (key == "pump_transmission") opo.pump_transmission = parse_double(key, value);
    else if (key == "twin_transmission") opo.twin_transmission = parse_double(key, value);
    else if (key == "pump_spurious_loss") opo.pump_spurious_loss = parse_double(key, value);
    else if (key == "twin_spurious_loss") opo.twin_spurious_loss = parse_double(key, value);
    else if (key == "s_q0_in") opo.excess_pump_phase_noise = parse_double(key, value);
    else if (key == "eta_twin") opo.eta_twin = parse_double(key, value);
    else if (key == "eta_pump") opo.eta_pump = parse_double(key, value);
    else if (key == "coupling") opo.coupling = parse_bool(key, value);
    else if (key == "threshold_power_mw") opo.threshold_power_mw = parse_double(key, value);
    else if (key == "cavity_bw_hz") cavity.bandwidth_hz = parse_double(key, value);
    else if (key == "cavity_detuning") cavity.detuning = parse_double(key, value);
    else if (key == "analysis_freq_hz") {
        cavity.analysis_freq_hz = parse_double(key, value);
    } else if (key == "sample_rate_hz") {
        sample_rate_hz = parse_double(key, value);
    } else if (key == "rf_rate_hz") {
        rf_rate_hz = parse_double(key, value);
    } else if (key == "block_size") {
        block_size = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "n_samples") {
        n_samples = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "seed") {
        seed = parse_u64(key, value);
    } else {
        throw config_error("unknown configuration key '" + key + "'");
    }
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) +
                               ": expected key=value, got '" + line + "'");
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

void RunConfig::validate() const {
    opo.validate();
    cavity.validate();
    if (sample_rate_hz <= 0.0) throw config_error("sample_rate_hz must be positive");
    if (rf_rate_hz <= 0.0) throw config_error("rf_rate_hz must be positive");
    if (block_size < 2) throw config_error("block_size must be >= 2");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot write file: " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string to_csv(const std::vector<ScanRow>& rows) {
    std::string out = "delta,sum_noise,diff_noise,w_p,w_q\n";
    for (const auto& r : rows) {
        out += format_number(r.delta) + "," + format_number(r.sum_noise) + "," +
               format_number(r.diff_noise) + "," + format_number(r.w_p) + "," +
               format_number(r.w_q) + "\n";
    }
    return out;
}

std::string to_csv(const SigmaScanData& data) {
    std::string out;
    if (!data.provenance.empty()) out += "# provenance=" + data.provenance + "\n";
    out += "sigma,var_q_plus,beta0,var_q_plus_corr,err_q_plus,err_beta0\n";
    for (const auto& p : data.points) {
        out += format_number(p.sigma) + "," + format_number(p.var_q_plus) + "," +
               format_number(p.beta0) + "," + format_number(p.var_q_plus_corrected) +
               "," + format_number(p.err_q_plus) + "," + format_number(p.err_beta0) +
               "\n";
    }
    return out;
}

SigmaScanData sigma_scan_from_csv(const std::string& text) {
    SigmaScanData data;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(ss, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find("provenance=");
            if (eq != std::string::npos) data.provenance = trim(line.substr(eq + 11));
            continue;
        }
        if (!header_seen) {
            if (line != "sigma,var_q_plus,beta0,var_q_plus_corr,err_q_plus,err_beta0")
                throw config_error("line " + std::to_string(lineno) +
                                   ": unexpected sigma-scan CSV header");
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 6)
            throw config_error("line " + std::to_string(lineno) +
                               ": expected 6 comma-separated values");
        SigmaScanPoint p;
        p.sigma = parse_double("sigma", trim(fields[0]));
        p.var_q_plus = parse_double("var_q_plus", trim(fields[1]));
        p.beta0 = parse_double("beta0", trim(fields[2]));
        p.var_q_plus_corrected = parse_double("var_q_plus_corr", trim(fields[3]));
        p.err_q_plus = parse_double("err_q_plus", trim(fields[4]));
        p.err_beta0 = parse_double("err_beta0", trim(fields[5]));
        data.points.push_back(p);
    }
    if (!header_seen) throw config_error("sigma-scan CSV: missing header line");
    return data;
}

std::string to_csv(const BasebandTrace& trace, const std::string& window_label) {
    trace.validate();
    std::string out;
    out += "# sample_rate_hz=" + format_number(trace.sample_rate_hz) + "\n";
    out += "# analysis_freq_hz=" + format_number(trace.analysis_freq_hz) + "\n";
    out += "# seed=" + std::to_string(trace.seed) + "\n";
    out += "# calibration_gain=" + format_number(trace.calibration_gain) + "\n";
    if (!window_label.empty()) out += "# window=" + window_label + "\n";
    out += "index,pump,signal,idler,shot_ref\n";
    for (std::size_t i = 0; i < trace.pump.size(); ++i) {
        out += std::to_string(i) + "," + format_number(trace.pump[i]) + "," +
               format_number(trace.signal[i]) + "," + format_number(trace.idler[i]) +
               "," + format_number(trace.shot_ref[i]) + "\n";
    }
    return out;
}

BasebandTrace baseband_from_csv(const std::string& text, std::string* window_label) {
    BasebandTrace trace;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(ss, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = trim(line.substr(1, eq - 1));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "sample_rate_hz") trace.sample_rate_hz = parse_double(key, value);
            else if (key == "analysis_freq_hz") trace.analysis_freq_hz = parse_double(key, value);
            else if (key == "seed") trace.seed = parse_u64(key, value);
            else if (key == "calibration_gain") trace.calibration_gain = parse_double(key, value);
            else if (key == "window" && window_label) *window_label = value;
            continue;
        }
        if (!header_seen) {
            if (line != "index,pump,signal,idler,shot_ref")
                throw config_error("line " + std::to_string(lineno) +
                                   ": unexpected trace CSV header");
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 5)
            throw config_error("line " + std::to_string(lineno) +
                               ": expected 5 comma-separated values");
        trace.pump.push_back(parse_double("pump", trim(fields[1])));
        trace.signal.push_back(parse_double("signal", trim(fields[2])));
        trace.idler.push_back(parse_double("idler", trim(fields[3])));
        trace.shot_ref.push_back(parse_double("shot_ref", trim(fields[4])));
    }
    if (!header_seen) throw config_error("trace CSV: missing header line");
    trace.validate();
    return trace;
}

std::string to_key_values(const FitResult& fit) {
    std::string out;
    out += "delta0=" + format_number(fit.delta0) + "\n";
    out += "delta=" + format_number(fit.delta) + "\n";
    out += "s_q0=" + format_number(fit.s_q0) + "\n";
    out += "residual=" + format_number(fit.residual) + "\n";
    out += "iterations=" + std::to_string(fit.iterations) + "\n";
    out += std::string("converged=") + (fit.converged ? "1" : "0") + "\n";
    return out;
}

}  // namespace tricorr
