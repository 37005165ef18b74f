#pragma once

#include <optional>

#include "tlcp/cp.hpp"
#include "tlcp/foundation.hpp"

namespace tlcp {

enum class BaselineMethod { univariate, stepwise };

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::univariate;
    double p_enter = 0.05;   // in (0,1)
    double p_remove = 0.05;  // in (0,1)
    std::optional<int> top_j;
};

// Ranks features by |Pearson correlation| with the response; keeps the top_j
// best if requested, otherwise every feature whose correlation z-test p-value
// is below p_enter. Coefficients are refit by least squares on the kept set.
Estimate univariate_select(const Dataset& data, const BaselineConfig& config);

// Forward-backward selection on partial-F p-values: adds the candidate with
// the smallest p-value below p_enter, removes any kept feature whose p-value
// exceeds p_remove, loops to a fixpoint (ties broken by feature index).
Estimate stepwise(const Dataset& data, const BaselineConfig& config);

}  // namespace tlcp
