#pragma once

#include <stdexcept>
#include <string>

namespace voltguard {

// Bad scenario/model configuration. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime (divergence, factorization failure).
// The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace voltguard
