#pragma once

#include <stdexcept>
#include <string>

namespace fwm {

// Invalid or inconsistent user input (config files, CLI arguments, parameter
// names). Maps to CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure inside a solver or transform. Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Steady-state generator has a kernel of dimension != 1.
class degeneracy_error : public numeric_error {
public:
    explicit degeneracy_error(const std::string& msg) : numeric_error(msg) {}
};

// Frequency/time grid cannot represent the requested quantity (span too
// small, kernel truncated, ...).
class resolution_error : public numeric_error {
public:
    explicit resolution_error(const std::string& msg) : numeric_error(msg) {}
};

}  // namespace fwm
