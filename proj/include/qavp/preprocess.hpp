#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "qavp/qubo.hpp"

namespace qavp {

// Coefficient conditioning bounds. The elimination threshold is 10^t_low;
// t_low = -inf disables elimination entirely.
struct PreprocessConfig {
    double t_high = 6.0;
    double t_low = -2.0;

    double elimination_threshold() const;
    static PreprocessConfig scaling_only(double t_high = 6.0);
};

struct PreprocessReport {
    double scale_factor = 1.0;
    long zeroed_count = 0;
    double q_max_before = 0.0;
    double q_max_after = 0.0;
    bool all_zero = false;  // warning: every coefficient eliminated
    std::optional<double> ppl;
};

// 1 when q_max <= t_high, otherwise t_high / q_max.
double scale_factor(double q_max, double t_high);

double max_coefficient_magnitude(const QuboProblem& p);

// Step 1 scales every coefficient (and the offset) by the scale factor;
// step 2 zeroes coefficients whose scaled magnitude falls below 10^t_low.
std::pair<QuboProblem, PreprocessReport> preprocess(const QuboProblem& p,
                                                    const PreprocessConfig& cfg);

using ExactArgmin = std::function<std::vector<std::uint8_t>(const QuboProblem&)>;

// Pre-processing loss: relative degradation of the optimum caused by the
// conditioning, with both minimizers evaluated on the original Q.
// Throws on a degenerate (zero) reference energy.
double ppl(const QuboProblem& original, const QuboProblem& preprocessed,
           const ExactArgmin& exact_argmin);

}  // namespace qavp
