#include "meanrev/dist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "meanrev/quadrature.hpp"

namespace meanrev::dist {

namespace {

constexpr double kInnerRelTol = 1e-10;  // denominator of the hazard
constexpr double kOuterRelTol = 1e-8;   // cumulative-hazard integrals
constexpr int kMaxPanels = 1 << 20;

// log of I(z) = Int_0^a exp(g(s)) ds with g(s) = kappa*(s^2 - 2 d s), d = z - theta.
// This is the inner integral of the hazard after the Psi(x,.)/Psi(x,z) = Psi(z,.)
// cancellation and the substitution y = z - s. The integrand is shifted by its
// maximum before exponentiating, so nothing here overflows for any finite kappa:
// exponents like kappa ~ 7e3 times price offsets are routine in this domain.
double log_inner(double z, double theta, double kappa, double a) {
    if (kappa == 0.0) return std::log(a);  // Psi == 1: the driftless case, I = a
    const double d = z - theta;
    auto g = [&](double s) { return kappa * (s * s - 2.0 * d * s); };

    // g is a parabola in s: for kappa > 0 the max over [0,a] sits at an
    // endpoint; for kappa < 0 (diagnostic-only fits) it can sit at s = d.
    double m = std::max(g(0.0), g(a));
    if (kappa < 0.0 && d > 0.0 && d < a) m = std::max(m, g(d));

    auto res = quad::integrate([&](double s) { return std::exp(g(s) - m); }, 0.0,
                               a, kInnerRelTol, 0.0, kMaxPanels);
    return m + std::log(res.value);
}

double hazard_inner(const StoppedMaxProblem& prob, double z) {
    return std::exp(-log_inner(z, prob.ou.theta, prob.ou.kappa(), prob.drawdown));
}

// Cumulative hazard H(v) = Int_start^v h(z) dz with memoized prefix values, so
// scattered queries (quadrature nodes, sorted sample grids) only ever pay for
// the gap between the two nearest already-known points.
class CumHazard {
  public:
    explicit CumHazard(const StoppedMaxProblem& prob) : prob_(prob) {
        cache_[prob.start] = 0.0;
    }

    double operator()(double v) {
        if (v <= prob_.start) return 0.0;
        auto it = cache_.lower_bound(v);
        if (it != cache_.end() && it->first == v) return it->second;
        --it;  // greatest known point below v; the start sentinel guarantees one
        const double h = it->second + segment(it->first, v);
        cache_.emplace_hint(std::next(it), v, h);
        return h;
    }

  private:
    double segment(double lo, double hi) const {
        return quad::integrate([&](double z) { return hazard_inner(prob_, z); },
                               lo, hi, kOuterRelTol, 0.0, kMaxPanels)
            .value;
    }

    const StoppedMaxProblem& prob_;
    std::map<double, double> cache_;
};

}  // namespace

void StoppedMaxProblem::validate() const {
    ou.require_sane();
    if (!(drawdown > 0.0) || !std::isfinite(drawdown) || !std::isfinite(start))
        throw std::invalid_argument("StoppedMaxProblem: need finite start and drawdown > 0");
}

double log_psi(const OUParams& ou, double u, double z) {
    const double dz = z - ou.theta, du = u - ou.theta;
    return ou.kappa() * (dz * dz - du * du);
}

double psi(const OUParams& ou, double u, double z) {
    return std::exp(log_psi(ou, u, z));  // overflow surfaces as +inf by design
}

double hazard(const StoppedMaxProblem& prob, double z) {
    prob.validate();
    return hazard_inner(prob, z);
}

double running_max_cdf(const StoppedMaxProblem& prob, double v) {
    prob.validate();
    if (v <= prob.start) return 0.0;
    CumHazard H(prob);
    return -std::expm1(-H(v));
}

double running_max_pdf(const StoppedMaxProblem& prob, double v) {
    prob.validate();
    if (v < prob.start) return 0.0;
    CumHazard H(prob);
    return hazard_inner(prob, v) * std::exp(-H(v));
}

std::vector<double> running_max_cdf_grid(const StoppedMaxProblem& prob,
                                         std::span<const double> vs) {
    prob.validate();
    if (!std::is_sorted(vs.begin(), vs.end()))
        throw std::invalid_argument("running_max_cdf_grid: grid must be ascending");
    CumHazard H(prob);
    std::vector<double> out(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) out[i] = -std::expm1(-H(vs[i]));
    return out;
}

std::vector<double> running_max_pdf_grid(const StoppedMaxProblem& prob,
                                         std::span<const double> vs) {
    prob.validate();
    if (!std::is_sorted(vs.begin(), vs.end()))
        throw std::invalid_argument("running_max_pdf_grid: grid must be ascending");
    CumHazard H(prob);
    std::vector<double> out(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i)
        out[i] = vs[i] < prob.start
                     ? 0.0
                     : hazard_inner(prob, vs[i]) * std::exp(-H(vs[i]));
    return out;
}

double pc_probability(const StoppedMaxProblem& prob, double pc) {
    prob.validate();
    if (!(pc > 0.0)) throw std::invalid_argument("pc_probability: pc must be > 0");
    CumHazard H(prob);
    return std::exp(-H(prob.start + pc));
}

double expected_weekly_return(const StoppedMaxProblem& prob, double ts_pips,
                              double pc_pips) {
    prob.validate();
    if (!(ts_pips > 0.0) || !(pc_pips > 0.0))
        throw std::invalid_argument("expected_weekly_return: ts/pc must be > 0");
    if (std::abs(prob.drawdown - ts_pips * kPip) > 1e-12)
        throw std::invalid_argument(
            "expected_weekly_return: prob.drawdown must equal ts_pips in price units");

    CumHazard H(prob);
    // Continuous branch: the stop returns (max - start) - TS, i.e. y = m - TS
    // pips where m is the max in pips; density of m is h*exp(-H) per pip.
    auto integrand = [&](double m) {
        const double v = prob.start + m * kPip;
        return (m - ts_pips) * hazard_inner(prob, v) * std::exp(-H(v)) * kPip;
    };
    const double cont =
        quad::integrate(integrand, 0.0, pc_pips, kOuterRelTol, 1e-12, kMaxPanels)
            .value;
    const double atom = std::exp(-H(prob.start + pc_pips * kPip));
    return cont + pc_pips * atom;
}

double ReturnDistribution::trapezoid_mass() const {
    double acc = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        acc += 0.5 * (density[i - 1] + density[i]) * (grid[i] - grid[i - 1]);
    return acc;
}

ReturnDistribution return_distribution(const StoppedMaxProblem& prob,
                                       double ts_pips, double pc_pips,
                                       int grid_size) {
    prob.validate();
    if (grid_size < 64)
        throw std::invalid_argument("return_distribution: grid_size must be >= 64");
    if (!(ts_pips > 0.0) || !(pc_pips > 0.0))
        throw std::invalid_argument("return_distribution: ts/pc must be > 0");
    if (std::abs(prob.drawdown - ts_pips * kPip) > 1e-12)
        throw std::invalid_argument(
            "return_distribution: prob.drawdown must equal ts_pips in price units");

    ReturnDistribution rd;
    rd.ts_pips = ts_pips;
    rd.pc_pips = pc_pips;
    rd.grid.resize(grid_size);
    rd.density.resize(grid_size);

    CumHazard H(prob);
    const double h_step = pc_pips / double(grid_size - 1);
    for (int k = 0; k < grid_size; ++k) {
        const double y = -ts_pips + k * h_step;     // return value in pips
        const double v = prob.start + (y + ts_pips) * kPip;  // max level behind it
        rd.grid[k] = y;
        rd.density[k] = hazard_inner(prob, v) * std::exp(-H(v)) * kPip;
    }
    // Through pc_probability, not the grid's incremental sweep, so the atom
    // is the same number that function reports (it is its definition).
    rd.pc_atom = pc_probability(prob, pc_pips * kPip);
    return rd;
}

StoppedMaxProblem mirror_short(const StoppedMaxProblem& prob) {
    StoppedMaxProblem m = prob;
    m.start = -prob.start;
    m.ou.theta = -prob.ou.theta;
    return m;
}

double upper_support_bound(const StoppedMaxProblem& prob, double tail_mass) {
    prob.validate();
    if (!(tail_mass > 0.0) || tail_mass >= 1.0)
        throw std::invalid_argument("upper_support_bound: tail_mass in (0,1)");
    const double target = -std::log(tail_mass);
    double v = prob.start, acc = 0.0, step = prob.drawdown;
    for (int it = 0; it < 200000; ++it) {
        const double dh =
            quad::integrate([&](double z) { return hazard_inner(prob, z); }, v,
                            v + step, kOuterRelTol, 0.0, kMaxPanels)
                .value;
        acc += dh;
        v += step;
        if (acc > target) return v;
        // far below theta the hazard is exponentially small; stride faster
        if (dh < 0.01 * (target - acc)) step *= 2.0;
    }
    throw std::runtime_error("upper_support_bound: tail search did not converge");
}

}  // namespace meanrev::dist
