#pragma once

#include <stdexcept>

namespace qkdsim {

// Invalid or inconsistent experiment configuration. The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An estimator category received no samples, so a rate cannot be formed.
// The CLI maps this to exit code 3.
class insufficient_data_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qkdsim
