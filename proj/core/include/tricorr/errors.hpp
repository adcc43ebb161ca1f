#ifndef TRICORR_ERRORS_HPP
#define TRICORR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tricorr {

/// Invalid or out-of-range physical parameters / data.
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Asked for above-threshold quantities while the OPO is not oscillating.
struct below_threshold_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config file / CSV parsing problems (reported with the offending key or line).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tricorr

#endif
