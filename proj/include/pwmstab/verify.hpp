#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pwmstab/config.hpp"

namespace pwmstab {

/// Fault-injection hooks for exercising the verification machinery itself.
struct VerifyHooks {
    bool corrupt_saltation_sign = false; // flips the rank-one term of S
};

struct CheckResult {
    std::string check;  // identity being verified
    std::string config; // corpus entry (or "user") it ran on
    double residual = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct VerifySummary {
    std::vector<CheckResult> checks;
    bool all_pass = true;
};

/// Runs the oracle cross-checks (saltation rank-one determinant, the
/// determinant-trace identity, finite-difference Jacobian match,
/// necessary-condition implication, cycle consistency, contraction-rate
/// match) on the built-in corpus plus, when given, the user configuration.
/// tol_scale loosens every threshold by that factor.
VerifySummary run_verification(const std::optional<RunConfig>& user_config,
                               double tol_scale = 1.0,
                               const VerifyHooks& hooks = {});

} // namespace pwmstab
