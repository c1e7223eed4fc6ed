#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "phaseop/config.hpp"

namespace phaseop {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct IdentityCheck {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

// Noiseless structural identities of the propagator on cfg.scenario (noise is
// forced off): trace, rank split, annihilation of Gamma and X, principal
// angles, k-independence, and peak placement. Throws SingularBlock when a
// block cannot be inverted.
std::vector<IdentityCheck> identity_battery(const ExperimentConfig& cfg);

// Settings used by `selftest` before any config file or override.
ConfigSettings selftest_defaults();

// Entry point of the `phaseop` tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace phaseop
