#pragma once

// Command layer shared by the binary and the tests: a RunConfig carries every
// flag, run_command executes one command against streams. The binary itself
// only parses argv.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "backtest.hpp"

namespace meanrev::cli {

// Exit codes, also printed as machine-readable categories on stderr.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,     // unknown command / missing or inconsistent flags
    exit_data = 3,      // unreadable or malformed input data
    exit_domain = 4,    // arguments outside the model's domain (e.g. lambda <= 0)
    exit_internal = 5,  // everything else
};

struct RunConfig {
    std::string command;            // calibrate|dist|simulate|backtest|optimize|walkforward|pcreport
    std::string data_path;          // OHLC candle csv
    std::string tick_path;          // optional tick csv (overrides data for sampling)
    std::string out_path;           // empty -> stdout
    std::string format = "csv";    // csv|json

    bt::StrategyParams sp{20, 20, 50, 55};
    std::string grid_spec;          // empty -> ParamGrid::defaults()

    // direct OU parameters (dist, simulate); NaN means "not supplied"
    double theta = NAN, lambda = NAN, sigma = NAN;
    double x0 = NAN;
    int grid_size = 512;            // dist table resolution

    std::string scheme = "rolling:22";  // or "expanding"
    int cal_step = 1;               // samples between rolling estimates

    std::uint64_t paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 1;

    int lookback = 1;
    int period_weeks = 52;
    bool gate = false;
    double pc_floor = 0.30;
    bool ts_first = false;          // flip the PC-before-TS default
    int threads = 0;

    bt::CostModel cost{};
};

/// Execute cfg.command, writing the report to `out` and diagnostics to `err`.
/// Returns an ExitCode; never throws.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Grid spec "u=10:60,d=10:60,ts=40:70,pc=+0:+15" (optional :step suffix);
/// a leading '+' on the pc range means offsets from TS, bare means absolute.
/// Unmentioned axes keep their defaults.
bt::ParamGrid parse_grid(const std::string& spec);

/// "rolling:N" or "expanding".
calibrate::EstimationScheme parse_scheme(const std::string& spec);

}  // namespace meanrev::cli
