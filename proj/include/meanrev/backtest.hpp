#pragma once

// Weekly U/D/TS/PC strategy engine: one position per week, opened at the
// first touch of zero_level + U pips (short) or zero_level - D pips (long),
// closed by trailing stop, profit call, or week end. Plus the grid optimizer,
// walk-forward evaluation, model-based gating and the predicted-vs-actual
// profit-call diagnostic.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calibrate.hpp"
#include "ou.hpp"

namespace meanrev::bt {

struct StrategyParams {
    int u_pips = 0, d_pips = 0, ts_pips = 0, pc_pips = 0;

    void validate() const;  // all > 0; ts/pc within [1,500]
};

/// One price observation. Candles carry OHLC; tick data degenerates to
/// open == high == low == close.
struct Sample {
    std::int64_t ts = 0;  // UTC seconds
    double open = 0, high = 0, low = 0, close = 0;

    static Sample tick(std::int64_t t, double price) {
        return {t, price, price, price, price};
    }
};

struct WeekSession {
    std::string id;            // label, e.g. the Monday date of the week
    double zero_level = 0.0;   // reference set at week start
    std::vector<Sample> samples;
};

struct CostModel {
    double position_notional = 1000.0;
    double leverage = 200.0;
    double overnight_commission_rate = 0.0014;  // per night held

    // Account currency per pip for a position opened at `open_level`,
    // rounded to 1e-6 currency units (margin-FX convention).
    double pip_value(double open_level) const;
};

enum class Side : std::uint8_t { none, long_side, short_side };
enum class ExitReason : std::uint8_t { not_opened, trailing_stop, profit_call, week_close };

struct TradeOutcome {
    std::string week_id;
    Side side = Side::none;
    ExitReason exit_reason = ExitReason::not_opened;
    double open_level = 0.0;
    double exit_level = 0.0;
    double best_excursion_pips = 0.0;  // max favorable excursion while open
    double pnl_pips = 0.0;
    double pnl_currency = 0.0;         // after overnight commission
    int nights_held = 0;
    std::int64_t open_ts = 0, exit_ts = 0;
};

struct EngineConfig {
    // Within one sample both the profit call and the stop can be touched;
    // PC-first matches the running-max law (M reaching x+PC defines the PC
    // event). Flip for the conservative stop-first reading.
    bool pc_before_ts = true;
    // Gating hooks: a side set to false never opens this week.
    bool allow_long = true;
    bool allow_short = true;
};

/// Scan one week. Intra-candle ambiguity (both U and D inside one candle)
/// resolves to the level closer to the candle's open; on an exact tie the
/// short side (upper level) is taken — documented arbitrary choice, tick data
/// removes the case. Exit checks on the opening candle use its full range.
TradeOutcome run_week(const WeekSession& session, const StrategyParams& sp,
                      const CostModel& cm, const EngineConfig& ec = {});

struct BacktestResult {
    std::vector<TradeOutcome> outcomes;
    std::vector<double> cumulative;  // running sum of pnl_currency
    double total_currency = 0.0;
    double mean_weekly_currency = 0.0;
};

BacktestResult run_backtest(std::span<const WeekSession> weeks,
                            const StrategyParams& sp, const CostModel& cm,
                            const EngineConfig& ec = {});

// ---- grid optimization ----------------------------------------------------

struct Range {
    int lo = 0, hi = 0, step = 1;
    int count() const { return hi < lo ? 0 : (hi - lo) / step + 1; }
};

struct ParamGrid {
    Range u{10, 60, 1}, d{10, 60, 1}, ts{40, 70, 1};
    Range pc{0, 15, 1};       // offsets from TS when pc_relative, absolute otherwise
    bool pc_relative = true;

    std::uint64_t size() const;
    static ParamGrid defaults() { return {}; }
};

struct GridChoice {
    StrategyParams params;
    double mean_weekly_currency = 0.0;
};

/// Exhaustive search for the largest mean weekly pnl_currency. Ties break by
/// smaller TS, then smaller U+D, then lexicographic (U,D,TS,PC) — a total
/// order, so the result is identical under any evaluation schedule.
GridChoice optimize_grid(std::span<const WeekSession> weeks, const ParamGrid& grid,
                         const CostModel& cm, const EngineConfig& ec = {},
                         int threads = 0);

// ---- walk-forward ---------------------------------------------------------

struct WalkForwardRow {
    std::string period;          // label of the out-of-sample block
    StrategyParams params;       // chosen on the trailing lookback window
    double estimated_mean = 0.0; // in-sample mean weekly return ("e" row)
    double actual_mean = 0.0;    // out-of-sample mean weekly return ("A" row)
    int weeks_in = 0, weeks_out = 0;
};

struct WalkForwardReport {
    std::vector<WalkForwardRow> rows;
    double total_actual_currency = 0.0;
    int period_weeks = 52;
    int lookback_periods = 1;
};

/// Fit on the trailing `lookback_periods` blocks of `period_weeks`, apply to
/// the next block. A lookback >= the available history degrades gracefully to
/// expanding-window fitting.
WalkForwardReport walk_forward(std::span<const WeekSession> weeks,
                               int lookback_periods, const ParamGrid& grid,
                               const CostModel& cm, int period_weeks = 52,
                               const EngineConfig& ec = {}, int threads = 0);

// ---- gating ---------------------------------------------------------------

struct GateDecision {
    bool open = false;
    double expected_pips = 0.0;  // model-predicted weekly expectation
    double pc_prob = 0.0;        // model-predicted profit-call probability
};

/// Skip when the fit is invalid, the predicted expectation is <= 0, or the
/// profit-call probability sits under the floor. The candidate level is the
/// would-be opening price (zero -D pips for long, +U for short).
GateDecision gate_week(const calibrate::CalibrationResult& cal, Side side,
                       double candidate_level, const StrategyParams& sp,
                       double pc_floor = 0.30);

struct GateConfig {
    calibrate::EstimationScheme scheme{};  // rolling(22) default
    double pc_floor = 0.30;
    std::size_t min_history = 23;          // weekly closes needed before gating kicks in
};

struct GatedBacktestResult {
    BacktestResult result;
    std::vector<GateDecision> long_gate, short_gate;  // per week
    std::vector<std::uint8_t> gated;                  // 1 where a side was suppressed
};

/// run_backtest with per-week model gating: calibrate on the trailing weekly
/// closes (scheme-controlled window), gate each side independently, trade
/// what survives. Weeks without enough history trade ungated.
GatedBacktestResult run_backtest_gated(std::span<const WeekSession> weeks,
                                       const StrategyParams& sp,
                                       const CostModel& cm, const GateConfig& gc,
                                       const EngineConfig& ec = {});

// ---- profit-call frequency diagnostic -------------------------------------

/// Sum of heterogeneous Bernoulli indicators (Poisson Binomial): theoretical
/// mean/variance of the average vs the realized frequency.
struct PcFrequencyReport {
    std::size_t n = 0;
    double sum_p = 0.0;                 // sum p_i
    double sum_pq = 0.0;                // sum p_i(1-p_i)
    double theoretical_mean = 0.0;      // sum_p / n
    double theoretical_variance = 0.0;  // sum_pq / n (per-trial average)
    double actual_frequency = 0.0;      // profit-call exits / n
    double actual_variance = 0.0;       // unbiased sample variance of the indicators
};

PcFrequencyReport pc_frequency_report(std::span<const double> probs,
                                      std::span<const std::uint8_t> pc_outcomes);

}  // namespace meanrev::bt
