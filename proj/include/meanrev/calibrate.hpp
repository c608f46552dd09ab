#pragma once

// OU maximum-likelihood calibration from a uniformly sampled price series,
// via the exact AR(1) representation S_i = alpha*S_{i-1} + theta*(1-alpha) + eps,
// alpha = exp(-lambda*delta). Rolling- and expanding-window schemes.

#include <cstddef>
#include <vector>

#include "ou.hpp"

namespace meanrev::calibrate {

struct SampledSeries {
    std::vector<double> values;  // S_0..S_n
    double delta = 0.0;          // sampling step, weeks

    void validate() const;       // n>=2 increments, delta>0, finite positive values
};

enum class SchemeKind { rolling, expanding };

struct EstimationScheme {
    SchemeKind kind = SchemeKind::rolling;
    int window_weeks = 22;       // ignored by expanding; must be >= 4
};

struct CalibrationResult {
    OUParams params;             // lambda may be negative or NaN on invalid fits
    bool valid = false;          // lambda > 0 and all estimates finite
    std::size_t n_obs = 0;       // increments used
    double log_ratio_arg = 0.0;  // the argument fed to ln() for lambda; <= 0 means
                                 // the fit had no admissible mean reversion at all
};

/// MLE fit on the full series. Throws on degenerate (zero-variance) input;
/// a non-mean-reverting fit is returned with valid=false, never thrown.
CalibrationResult mle_fit(const SampledSeries& series);

struct RollingPoint {
    std::size_t index;           // sample index the estimate is anchored at
    CalibrationResult fit;
};

/// One fit per `step` samples, anchored at the series end and walking back
/// (so the final sample always carries an estimate), emitted in time order.
/// rolling: exactly the trailing window; expanding: everything from S_0.
/// Series shorter than one window (or the expanding warmup) -> empty.
std::vector<RollingPoint> rolling_estimates(const SampledSeries& series,
                                            const EstimationScheme& scheme,
                                            std::size_t step = 1);

/// The viability rule used by the trading layer: fit.valid.
bool validity_gate(const CalibrationResult& fit);

}  // namespace meanrev::calibrate
