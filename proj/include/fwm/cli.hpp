#pragma once

namespace fwm::cli {

// Entry point for the fwm tool; returns the process exit code
// (0 success, 2 configuration error, 3 numeric failure).
int run(int argc, const char* const* argv);

}  // namespace fwm::cli
