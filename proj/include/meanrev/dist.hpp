#pragma once

// Law of the running maximum of an OU process stopped at a fixed drawdown,
// and the weekly-return distribution it induces for a trailing-stop /
// profit-call long position.
//
//   Psi(u,z) = exp{ kappa * [(z-theta)^2 - (u-theta)^2] },  kappa = lambda/sigma^2
//   h(z)     = Psi(x,z) / Int_{z-a}^{z} Psi(x,y) dy  =  1 / Int_{z-a}^{z} Psi(z,y) dy
//   P[M <= v] = 1 - exp(-Int_x^v h(z) dz)
//
// The cancelled form of h and a log-scale inner integral keep everything
// finite for kappa in the thousands; see hazard() notes in dist.cpp.

#include <span>
#include <vector>

#include "ou.hpp"

namespace meanrev::dist {

/// A long position opened at `start` with a trailing stop of width `drawdown`
/// (price units), riding the OU process `ou`.
struct StoppedMaxProblem {
    OUParams ou;
    double start    = 0.0;   // x, position-opening level
    double drawdown = 0.0;   // a > 0, trailing-stop width

    void validate() const;   // throws std::invalid_argument
};

/// exp{kappa*[(z-theta)^2 - (u-theta)^2]}; overflows to +inf for extreme
/// arguments — use log_psi inside anything that integrates.
double psi(const OUParams& ou, double u, double z);
double log_psi(const OUParams& ou, double u, double z);

/// Hazard rate of the stopped maximum at level z (inner integral to 1e-10 rel).
double hazard(const StoppedMaxProblem& prob, double z);

/// P[M <= v]; 0 for v < start by convention. Outer integral to 1e-8 rel.
double running_max_cdf(const StoppedMaxProblem& prob, double v);

/// Exact density h(v)*exp(-H(v)) of the stopped maximum (not a finite
/// difference of the cdf).
double running_max_pdf(const StoppedMaxProblem& prob, double v);

/// Batched cdf on an ascending grid; one cumulative hazard sweep instead of
/// n independent integrals.
std::vector<double> running_max_cdf_grid(const StoppedMaxProblem& prob,
                                         std::span<const double> vs);
std::vector<double> running_max_pdf_grid(const StoppedMaxProblem& prob,
                                         std::span<const double> vs);

/// P(profit call): the max reaches start+pc before the drawdown fires.
double pc_probability(const StoppedMaxProblem& prob, double pc);

/// Expectation, in pips, of the weekly return of the long position with a
/// TS-pip trailing stop and PC-pip profit call. prob.drawdown must equal
/// ts_pips in price units (1 pip = 1e-4) — anything else is a caller bug.
double expected_weekly_return(const StoppedMaxProblem& prob, double ts_pips,
                              double pc_pips);

/// Semi-continuous weekly-return law: density tabulated on a uniform pip grid
/// spanning [-TS, PC-TS] (closed ends; the right endpoint carries the left
/// limit of the density) plus a separate probability atom at +PC. Returns in
/// (PC-TS, PC) are impossible: the stop gives back exactly TS from the max.
struct ReturnDistribution {
    std::vector<double> grid;     // pips
    std::vector<double> density;  // per pip, aligned with grid
    double pc_atom = 0.0;
    double ts_pips = 0.0, pc_pips = 0.0;

    double trapezoid_mass() const;  // integral of density over grid
};

ReturnDistribution return_distribution(const StoppedMaxProblem& prob,
                                       double ts_pips, double pc_pips,
                                       int grid_size = 512);

/// Reflection (x,theta) -> (-x,-theta): every short-side quantity (minimum
/// stopped at drawup) equals the long-side quantity of the reflected problem.
StoppedMaxProblem mirror_short(const StoppedMaxProblem& prob);

/// Smallest grid-searched v with 1 - cdf(v) < tail_mass; the law's effective
/// upper support bound for normalization/expectation truncation.
double upper_support_bound(const StoppedMaxProblem& prob,
                           double tail_mass = 1e-9);

}  // namespace meanrev::dist
