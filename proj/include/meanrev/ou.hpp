#pragma once

#include <cmath>
#include <stdexcept>

namespace meanrev {

// EUR/USD pip: the strategy's natural return unit.
inline constexpr double kPip = 1e-4;

/// Ornstein-Uhlenbeck parameters: dX = lambda*(theta - X) dt + sigma dW.
struct OUParams {
    double theta  = 0.0;  // long-term mean
    double lambda = 0.0;  // mean-reversion rate, per week
    double sigma  = 0.0;  // volatility, per sqrt(week)

    // Only this ratio enters the stopped-max law. Never stored independently.
    double kappa() const { return lambda / (sigma * sigma); }

    // The model is usable for trading decisions only while it actually
    // mean-reverts; lambda <= 0 fits are kept around for diagnostics.
    bool mean_reverting() const {
        return lambda > 0.0 && std::isfinite(lambda) && std::isfinite(theta) &&
               std::isfinite(sigma) && sigma > 0.0;
    }

    void require_sane() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(theta) ||
            !std::isfinite(lambda))
            throw std::invalid_argument("OUParams: need finite theta/lambda and sigma > 0");
    }
};

}  // namespace meanrev
