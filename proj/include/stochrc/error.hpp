#pragma once

#include <stdexcept>
#include <string>

namespace stochrc {

// Raised when a configuration file or experiment setting is malformed.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a simulated trajectory leaves its admissible region: a
// non-finite ODE state, an input outside the configured bound, or an
// activation argument outside the universality window. The CLI maps this
// to exit code 3.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace stochrc
