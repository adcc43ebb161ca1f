#ifndef TRICORR_CONFIG_HPP
#define TRICORR_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tricorr/analysis_cavity.hpp"
#include "tricorr/dsp.hpp"
#include "tricorr/fit.hpp"
#include "tricorr/opo_model.hpp"

namespace tricorr {

/// Plain-text key=value run configuration ('#' comments). Unknown keys are
/// rejected by name; physical invariants are re-validated on load.
struct RunConfig {
    OpoParams opo;
    CavityParams cavity;
    double sample_rate_hz = 600e3;
    double rf_rate_hz = 120e6;
    std::size_t block_size = 1000;
    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_text(const std::string& text);
    /// Applies one "key=value" assignment; throws config_error for unknown keys.
    void apply(const std::string& key, const std::string& value);
    void validate() const;
};

/// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Decimal with 9 significant digits; fixed formatting for byte-stable CSVs.
std::string format_number(double v);

std::string to_csv(const std::vector<ScanRow>& rows);
std::string to_csv(const SigmaScanData& data);
SigmaScanData sigma_scan_from_csv(const std::string& text);

std::string to_csv(const BasebandTrace& trace, const std::string& window_label);
BasebandTrace baseband_from_csv(const std::string& text, std::string* window_label);

std::string to_key_values(const FitResult& fit);

}  // namespace tricorr

#endif
