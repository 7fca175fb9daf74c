#include "qavp/preprocess.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qavp {

double PreprocessConfig::elimination_threshold() const { return std::pow(10.0, t_low); }

PreprocessConfig PreprocessConfig::scaling_only(double t_high) {
    return {t_high, -std::numeric_limits<double>::infinity()};
}

double scale_factor(double q_max, double t_high) {
    if (q_max < 0.0) throw std::invalid_argument("q_max must be non-negative");
    if (t_high <= 0.0) throw std::invalid_argument("t_high must be positive");
    return q_max <= t_high ? 1.0 : t_high / q_max;
}

double max_coefficient_magnitude(const QuboProblem& p) {
    double m = 0.0;
    for (double f : p.linear) m = std::max(m, std::abs(f));
    for (const auto& t : p.quad) m = std::max(m, std::abs(t.value));
    return m;
}

std::pair<QuboProblem, PreprocessReport> preprocess(const QuboProblem& p,
                                                    const PreprocessConfig& cfg) {
    PreprocessReport report;
    report.q_max_before = max_coefficient_magnitude(p);
    report.scale_factor = scale_factor(report.q_max_before, cfg.t_high);

    // Step 2 thresholds magnitudes; the literal signed comparison would zero
    // every negative coupling and destroy the problem.
    const double threshold = cfg.elimination_threshold();

    QuboProblem out = p;
    out.offset = p.offset * report.scale_factor;
    for (double& f : out.linear) {
        if (f == 0.0) continue;
        f *= report.scale_factor;
        if (std::abs(f) < threshold) {
            f = 0.0;
            ++report.zeroed_count;
        }
    }
    std::vector<QuadTerm> kept;
    kept.reserve(out.quad.size());
    for (QuadTerm t : out.quad) {
        t.value *= report.scale_factor;
        if (std::abs(t.value) < threshold) {
            ++report.zeroed_count;
            continue;
        }
        kept.push_back(t);
    }
    out.quad = std::move(kept);

    report.q_max_after = max_coefficient_magnitude(out);
    report.all_zero = report.q_max_after == 0.0;
    return {std::move(out), report};
}

double ppl(const QuboProblem& original, const QuboProblem& preprocessed,
           const ExactArgmin& exact_argmin) {
    if (original.n_vars != preprocessed.n_vars)
        throw std::invalid_argument("problems must share n_vars");
    const auto q_star = exact_argmin(original);
    const auto q_pre = exact_argmin(preprocessed);
    // The loss compares raw quadratic-form energies on the original Q.
    const double e_star = original.energy(q_star);
    const double e_pre = original.energy(q_pre);
    if (e_star == 0.0) throw std::runtime_error("degenerate reference energy");
    return std::abs(e_pre - e_star) / std::abs(e_star);
}

}  // namespace qavp
