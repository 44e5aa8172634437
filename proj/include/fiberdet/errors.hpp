#pragma once

#include <stdexcept>

namespace fiberdet {

// Bad configuration or an impossible request (CLI exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or missing input data (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fiberdet
