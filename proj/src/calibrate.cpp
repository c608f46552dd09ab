#include "meanrev/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace meanrev::calibrate {

namespace {

// Plain-sum MLE on (already centered/scaled) samples. The estimators are the
// AR(1) ones: theta from the intercept/(1-slope) ratio identity, alpha as the
// slope re-centered at theta, then the conditional-variance correction
// sigma^2 = sigma_cond^2 * 2 lambda / (1 - alpha^2).
CalibrationResult fit_raw(const std::vector<double>& s, double delta) {
    const std::size_t n = s.size() - 1;  // increments
    long double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        const long double a = s[i - 1], b = s[i];
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
    }
    const long double nn = static_cast<long double>(n);

    CalibrationResult out;
    out.n_obs = n;

    const long double theta_den = nn * (sxx - sxy) - (sx * sx - sx * sy);
    if (theta_den == 0.0L) {
        out.params = {std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN()};
        return out;  // no curvature to invert; valid stays false
    }
    const long double theta = (sy * sxx - sx * sxy) / theta_den;

    const long double num = sxy - theta * (sx + sy) + nn * theta * theta;
    const long double den = sxx - 2.0L * theta * sx + nn * theta * theta;
    const long double ratio = num / den;
    out.log_ratio_arg = static_cast<double>(ratio);

    double lambda = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();
    if (ratio > 0.0L) {
        lambda = static_cast<double>(-std::log(static_cast<double>(ratio)) / delta);
        const long double alpha = ratio;  // e^{-lambda delta} by construction
        long double sc2 = (syy - 2.0L * alpha * sxy + alpha * alpha * sxx -
                           2.0L * theta * (1.0L - alpha) * (sy - alpha * sx) +
                           nn * theta * theta * (1.0L - alpha) * (1.0L - alpha)) /
                          nn;
        if (sc2 < 0.0L) sc2 = 0.0L;  // roundoff guard on exact fits
        if (lambda != 0.0) {
            const long double scale = 2.0L * lambda / (1.0L - alpha * alpha);
            sigma = static_cast<double>(std::sqrt(static_cast<double>(sc2 * scale)));
        }
    }
    out.params = {static_cast<double>(theta), lambda, sigma};
    out.valid = std::isfinite(out.params.theta) && std::isfinite(lambda) &&
                lambda > 0.0 && std::isfinite(sigma) && sigma > 0.0;
    return out;
}

}  // namespace

void SampledSeries::validate() const {
    if (values.size() < 3)
        throw std::invalid_argument("SampledSeries: need at least 2 increments");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("SampledSeries: delta must be positive");
    for (double v : values)
        if (!std::isfinite(v) || v <= 0.0)
            throw std::invalid_argument("SampledSeries: values must be finite and positive");
}

CalibrationResult mle_fit(const SampledSeries& series) {
    series.validate();
    const auto& s = series.values;

    // Center and scale before forming the sums: the raw quadratic sums lose
    // ~8 digits of lambda to cancellation at FX price levels, which would
    // break the 1e-10 equivariance guarantee. The estimators are exactly
    // affine-equivariant, so the transform maps back losslessly.
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= double(s.size());
    if (var == 0.0) throw std::invalid_argument("mle_fit: degenerate series");
    const double scale = std::sqrt(var);

    std::vector<double> u(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) u[i] = (s[i] - mean) / scale;

    CalibrationResult fit = fit_raw(u, series.delta);
    fit.params.theta = mean + scale * fit.params.theta;
    fit.params.sigma *= scale;
    fit.valid = fit.valid && std::isfinite(fit.params.theta);
    return fit;
}

std::vector<RollingPoint> rolling_estimates(const SampledSeries& series,
                                            const EstimationScheme& scheme,
                                            std::size_t step) {
    series.validate();
    if (step == 0) throw std::invalid_argument("rolling_estimates: step must be >= 1");
    if (scheme.kind == SchemeKind::rolling && scheme.window_weeks < 4)
        throw std::invalid_argument("rolling_estimates: window must be >= 4 weeks");

    // Window measured in samples; a window of W weeks spans W/delta increments.
    const std::size_t window_samples =
        scheme.kind == SchemeKind::rolling
            ? static_cast<std::size_t>(std::llround(scheme.window_weeks / series.delta)) + 1
            : std::max<std::size_t>(3, static_cast<std::size_t>(
                                           std::llround(4.0 / series.delta)) + 1);
    const std::size_t last = series.values.size() - 1;
    if (window_samples < 3 || window_samples > series.values.size()) return {};

    // Anchor the schedule at the series end and walk back, so the most recent
    // sample always carries an estimate (and step > length still yields one).
    std::vector<std::size_t> anchors;
    for (std::size_t k = last;; k -= step) {
        if (k + 1 < window_samples) break;
        anchors.push_back(k);
        if (k < step) break;
    }
    std::reverse(anchors.begin(), anchors.end());

    std::vector<RollingPoint> out;
    out.reserve(anchors.size());
    for (std::size_t idx : anchors) {
        const std::size_t begin =
            scheme.kind == SchemeKind::rolling ? idx + 1 - window_samples : 0;
        SampledSeries win{{series.values.begin() + begin,
                           series.values.begin() + idx + 1},
                          series.delta};
        out.push_back({idx, mle_fit(win)});
    }
    return out;
}

bool validity_gate(const CalibrationResult& fit) { return fit.valid; }

}  // namespace meanrev::calibrate
