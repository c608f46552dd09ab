#pragma once

// Exact-discretization OU path generator and the Monte Carlo oracles for the
// analytic law and the weekly trading outcome.
//
// Determinism contract: paths are partitioned into fixed-size chunks and each
// chunk draws from its own substream derived from (seed, chunk index), so the
// output is bitwise identical for a given config regardless of thread count
// or scheduling.

#include <cstdint>
#include <vector>

#include "ou.hpp"

namespace meanrev::sim {

struct SimConfig {
    OUParams ou;
    double x0 = 0.0;
    double dt = 1e-3;                 // weeks
    double horizon_weeks = 0.0;       // <= 0: run until stopped
    std::uint64_t n_paths = 1;
    std::uint64_t seed = 0;
    std::uint64_t max_steps_per_path = 100'000'000;  // censoring cap
    int threads = 0;                  // 0: hardware concurrency
    std::uint64_t chunk_paths = 1024; // substream granularity

    void validate() const;
};

/// One exact-in-distribution OU transition (no Euler bias); z ~ N(0,1).
/// Exact Brownian step s + sigma*sqrt(dt)*z in the lambda -> 0 limit.
double ou_step(const OUParams& ou, double s, double dt, double z);

struct StoppedMaxResult {
    std::vector<double> maxima;    // running max at the moment the drawdown fired
    std::uint64_t censored = 0;    // paths cut at max_steps_per_path
};

/// Evolve each path until running max - current >= drawdown; record the max.
StoppedMaxResult mc_stopped_max(const SimConfig& cfg, double drawdown);

struct WeeklyReturnsResult {
    std::vector<double> pips;           // one return per path
    std::vector<std::uint8_t> pc_hit;   // 1 where the profit call fired
    std::uint64_t censored = 0;
};

/// Long position opened at x0: exit at the trailing stop (max - x0 - TS), the
/// profit call (+PC), or — when horizon_weeks > 0 — week close (final - x0).
/// PC is checked before the stop within a step, matching the backtest engine.
WeeklyReturnsResult mc_weekly_returns(const SimConfig& cfg, double ts_pips,
                                      double pc_pips);

}  // namespace meanrev::sim
