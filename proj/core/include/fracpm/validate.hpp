#pragma once

#include <string>
#include <vector>

namespace fracpm {

enum class ValidationLevel { Fast, Full };

struct ValidationCheck {
    std::string name;
    bool passed;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool allPassed() const;
};

/// Runs the module property suites: mesh geometry, cutoff identities,
/// assembly invariants, rational-vs-oracle agreement, and (Full) the
/// spectral and stepper checks.
ValidationReport runValidation(ValidationLevel level);

}  // namespace fracpm
