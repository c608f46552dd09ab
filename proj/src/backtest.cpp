#include "meanrev/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "meanrev/dist.hpp"

namespace meanrev::bt {

namespace {

// The one scanner every caller shares: run_week dresses the result up with
// strings and currency, the grid optimizer strips it down for speed. Keeping
// a single state machine is what makes the optimizer trustworthy.
struct ScanResult {
    Side side = Side::none;
    ExitReason reason = ExitReason::not_opened;
    double open_level = 0.0, exit_level = 0.0;
    double best_pips = 0.0, pnl_pips = 0.0;
    std::int64_t open_ts = 0, exit_ts = 0;
};

ScanResult scan_week(const WeekSession& w, const StrategyParams& sp,
                     const EngineConfig& ec) {
    ScanResult r;
    const auto& smp = w.samples;
    if (smp.empty()) return r;

    const double up = w.zero_level + sp.u_pips * kPip;  // short entry
    const double dn = w.zero_level - sp.d_pips * kPip;  // long entry
    const double ts = sp.ts_pips * kPip;
    const double pc = sp.pc_pips * kPip;

    std::size_t i = 0;
    for (; i < smp.size(); ++i) {
        const Sample& s = smp[i];
        bool hit_up = ec.allow_short && s.high >= up;
        bool hit_dn = ec.allow_long && s.low <= dn;
        if (!hit_up && !hit_dn) continue;
        if (hit_up && hit_dn) {
            // Both levels inside one candle: take the one closer to its open;
            // exact tie goes to the short side. Tick data never gets here.
            if (up - s.open <= s.open - dn) hit_dn = false;
            else hit_up = false;
        }
        r.side = hit_up ? Side::short_side : Side::long_side;
        r.open_level = hit_up ? up : dn;
        r.open_ts = s.ts;
        break;
    }
    if (r.side == Side::none) return r;

    const bool is_long = r.side == Side::long_side;
    const double pc_level = is_long ? r.open_level + pc : r.open_level - pc;
    double m = r.open_level;  // favorable watermark

    for (; i < smp.size(); ++i) {
        const Sample& s = smp[i];
        const double fav = is_long ? s.high : s.low;    // favorable extreme
        const double adv = is_long ? s.low : s.high;    // adverse extreme
        const bool pc_touch = is_long ? s.high >= pc_level : s.low <= pc_level;

        if (ec.pc_before_ts) {
            if (pc_touch) {
                m = is_long ? std::max(m, fav) : std::min(m, fav);
                r.reason = ExitReason::profit_call;
                r.exit_level = pc_level;
                break;
            }
            m = is_long ? std::max(m, fav) : std::min(m, fav);
            if ((is_long ? m - adv : adv - m) >= ts) {
                r.reason = ExitReason::trailing_stop;
                r.exit_level = is_long ? m - ts : m + ts;
                break;
            }
        } else {
            // Stop-first: the stop is tested against the watermark carried in
            // from earlier candles, so a one-candle spike cannot both raise
            // the stop and fire it.
            if ((is_long ? m - adv : adv - m) >= ts) {
                r.reason = ExitReason::trailing_stop;
                r.exit_level = is_long ? m - ts : m + ts;
                break;
            }
            if (pc_touch) {
                m = is_long ? std::max(m, fav) : std::min(m, fav);
                r.reason = ExitReason::profit_call;
                r.exit_level = pc_level;
                break;
            }
            m = is_long ? std::max(m, fav) : std::min(m, fav);
        }
    }
    if (r.reason == ExitReason::not_opened) {  // survived to the week end
        r.reason = ExitReason::week_close;
        r.exit_level = smp.back().close;
        r.exit_ts = smp.back().ts;
    } else {
        r.exit_ts = smp[i].ts;
    }
    r.best_pips = (is_long ? m - r.open_level : r.open_level - m) / kPip;
    r.pnl_pips = (is_long ? r.exit_level - r.open_level
                          : r.open_level - r.exit_level) / kPip;
    return r;
}

int utc_nights(std::int64_t open_ts, std::int64_t exit_ts) {
    // A "night" is a UTC midnight crossed while the position is open.
    return static_cast<int>(exit_ts / 86400 - open_ts / 86400);
}

double scan_currency(const ScanResult& r, const CostModel& cm, int* nights_out) {
    if (r.side == Side::none) {
        if (nights_out) *nights_out = 0;
        return 0.0;
    }
    const int nights = utc_nights(r.open_ts, r.exit_ts);
    if (nights_out) *nights_out = nights;
    return r.pnl_pips * cm.pip_value(r.open_level) -
           cm.position_notional * cm.overnight_commission_rate * nights;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void StrategyParams::validate() const {
    if (u_pips <= 0 || d_pips <= 0)
        throw std::invalid_argument("StrategyParams: U and D must be positive");
    if (ts_pips < 1 || ts_pips > 500 || pc_pips < 1 || pc_pips > 500)
        throw std::invalid_argument("StrategyParams: TS and PC must lie in [1,500] pips");
}

double CostModel::pip_value(double open_level) const {
    // |level| so mirrored (negated-price) sessions cost the same as the original.
    if (!(std::abs(open_level) > 0.0))
        throw std::invalid_argument("CostModel: open_level must be nonzero");
    const double raw = position_notional * leverage * kPip / std::abs(open_level);
    return std::round(raw * 1e6) / 1e6;  // broker-style 1e-6 currency rounding
}

TradeOutcome run_week(const WeekSession& session, const StrategyParams& sp,
                      const CostModel& cm, const EngineConfig& ec) {
    sp.validate();
    const ScanResult r = scan_week(session, sp, ec);
    TradeOutcome o;
    o.week_id = session.id;
    o.side = r.side;
    o.exit_reason = r.reason;
    o.open_level = r.open_level;
    o.exit_level = r.exit_level;
    o.best_excursion_pips = r.best_pips;
    o.pnl_pips = r.pnl_pips;
    o.open_ts = r.open_ts;
    o.exit_ts = r.exit_ts;
    o.pnl_currency = scan_currency(r, cm, &o.nights_held);
    return o;
}

BacktestResult run_backtest(std::span<const WeekSession> weeks,
                            const StrategyParams& sp, const CostModel& cm,
                            const EngineConfig& ec) {
    BacktestResult res;
    res.outcomes.reserve(weeks.size());
    res.cumulative.reserve(weeks.size());
    double acc = 0.0;
    for (const auto& w : weeks) {
        res.outcomes.push_back(run_week(w, sp, cm, ec));
        acc += res.outcomes.back().pnl_currency;
        res.cumulative.push_back(acc);
    }
    res.total_currency = acc;
    res.mean_weekly_currency = weeks.empty() ? 0.0 : acc / double(weeks.size());
    return res;
}

// ---- grid optimization ------------------------------------------------------

std::uint64_t ParamGrid::size() const {
    return std::uint64_t(u.count()) * d.count() * ts.count() * pc.count();
}

namespace {

StrategyParams grid_params(const ParamGrid& g, std::uint64_t idx) {
    const int nu = g.u.count(), nd = g.d.count(), nts = g.ts.count();
    const int iu = int(idx % nu); idx /= nu;
    const int id = int(idx % nd); idx /= nd;
    const int it = int(idx % nts); idx /= nts;
    const int ip = int(idx);
    StrategyParams sp;
    sp.u_pips = g.u.lo + iu * g.u.step;
    sp.d_pips = g.d.lo + id * g.d.step;
    sp.ts_pips = g.ts.lo + it * g.ts.step;
    sp.pc_pips = (g.pc.lo + ip * g.pc.step) + (g.pc_relative ? sp.ts_pips : 0);
    return sp;
}

// Strict total order on candidates: higher mean, then the documented
// tie-breaks. Total, so the argmax is unique and schedule-independent.
bool grid_better(const GridChoice& a, const GridChoice& b) {
    if (a.mean_weekly_currency != b.mean_weekly_currency)
        return a.mean_weekly_currency > b.mean_weekly_currency;
    const auto &pa = a.params, &pb = b.params;
    if (pa.ts_pips != pb.ts_pips) return pa.ts_pips < pb.ts_pips;
    if (pa.u_pips + pa.d_pips != pb.u_pips + pb.d_pips)
        return pa.u_pips + pa.d_pips < pb.u_pips + pb.d_pips;
    if (pa.u_pips != pb.u_pips) return pa.u_pips < pb.u_pips;
    if (pa.d_pips != pb.d_pips) return pa.d_pips < pb.d_pips;
    return pa.pc_pips < pb.pc_pips;
}

}  // namespace

GridChoice optimize_grid(std::span<const WeekSession> weeks, const ParamGrid& grid,
                         const CostModel& cm, const EngineConfig& ec, int threads) {
    if (grid.u.step <= 0 || grid.d.step <= 0 || grid.ts.step <= 0 || grid.pc.step <= 0)
        throw std::invalid_argument("optimize_grid: grid steps must be positive");
    const std::uint64_t n = grid.size();
    if (n == 0) throw std::invalid_argument("optimize_grid: empty grid");

    const int nthreads = std::min<std::uint64_t>(resolve_threads(threads), n);
    std::vector<GridChoice> best(nthreads,
                                 {{}, -std::numeric_limits<double>::infinity()});

    auto eval_range = [&](int t) {
        GridChoice local{{}, -std::numeric_limits<double>::infinity()};
        bool have = false;
        for (std::uint64_t idx = t; idx < n; idx += nthreads) {
            const StrategyParams sp = grid_params(grid, idx);
            if (sp.pc_pips < 1 || sp.pc_pips > 500) continue;  // relative pc overflow
            double sum = 0.0;
            for (const auto& w : weeks)
                sum += scan_currency(scan_week(w, sp, ec), cm, nullptr);
            GridChoice cand{sp, weeks.empty() ? 0.0 : sum / double(weeks.size())};
            if (!have || grid_better(cand, local)) {
                local = cand;
                have = true;
            }
        }
        if (have) best[t] = local;
    };

    if (nthreads <= 1) {
        eval_range(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(eval_range, t);
        for (auto& th : pool) th.join();
    }

    GridChoice winner = best[0];
    for (int t = 1; t < nthreads; ++t)
        if (grid_better(best[t], winner)) winner = best[t];
    if (!std::isfinite(winner.mean_weekly_currency))
        throw std::invalid_argument("optimize_grid: no admissible grid point");
    return winner;
}

// ---- walk-forward -----------------------------------------------------------

WalkForwardReport walk_forward(std::span<const WeekSession> weeks,
                               int lookback_periods, const ParamGrid& grid,
                               const CostModel& cm, int period_weeks,
                               const EngineConfig& ec, int threads) {
    if (period_weeks < 1) throw std::invalid_argument("walk_forward: period_weeks >= 1");
    if (lookback_periods < 1) throw std::invalid_argument("walk_forward: lookback >= 1");

    WalkForwardReport rep;
    rep.period_weeks = period_weeks;
    rep.lookback_periods = lookback_periods;

    const std::size_t P = std::size_t(period_weeks);
    const std::size_t n_blocks = (weeks.size() + P - 1) / P;
    for (std::size_t k = 1; k < n_blocks; ++k) {
        // Fewer completed blocks than the lookback clips to what exists, i.e.
        // the early rows are fitted on an expanding window.
        const std::size_t fit_begin = k > std::size_t(lookback_periods)
                                          ? (k - lookback_periods) * P
                                          : 0;
        const std::size_t out_begin = k * P;
        const std::size_t out_end = std::min(weeks.size(), (k + 1) * P);

        auto in_span = weeks.subspan(fit_begin, out_begin - fit_begin);
        auto out_span = weeks.subspan(out_begin, out_end - out_begin);

        const GridChoice choice = optimize_grid(in_span, grid, cm, ec, threads);
        const BacktestResult actual = run_backtest(out_span, choice.params, cm, ec);

        WalkForwardRow row;
        row.period = weeks[out_begin].id;
        row.params = choice.params;
        row.estimated_mean = choice.mean_weekly_currency;
        row.actual_mean = actual.mean_weekly_currency;
        row.weeks_in = int(in_span.size());
        row.weeks_out = int(out_span.size());
        rep.rows.push_back(std::move(row));
        rep.total_actual_currency += actual.total_currency;
    }
    return rep;
}

// ---- gating -----------------------------------------------------------------

GateDecision gate_week(const calibrate::CalibrationResult& cal, Side side,
                       double candidate_level, const StrategyParams& sp,
                       double pc_floor) {
    GateDecision gd;
    if (side == Side::none) return gd;
    if (!calibrate::validity_gate(cal) || !cal.params.mean_reverting()) return gd;

    dist::StoppedMaxProblem prob{cal.params, candidate_level, sp.ts_pips * kPip};
    if (side == Side::short_side) prob = dist::mirror_short(prob);
    gd.pc_prob = dist::pc_probability(prob, sp.pc_pips * kPip);
    gd.expected_pips = dist::expected_weekly_return(prob, double(sp.ts_pips),
                                                    double(sp.pc_pips));
    gd.open = gd.expected_pips > 0.0 && gd.pc_prob >= pc_floor;
    return gd;
}

GatedBacktestResult run_backtest_gated(std::span<const WeekSession> weeks,
                                       const StrategyParams& sp,
                                       const CostModel& cm, const GateConfig& gc,
                                       const EngineConfig& ec) {
    sp.validate();
    if (gc.min_history < 4)
        throw std::invalid_argument("run_backtest_gated: min_history too small");

    GatedBacktestResult g;
    g.long_gate.reserve(weeks.size());
    g.short_gate.reserve(weeks.size());
    g.gated.reserve(weeks.size());

    std::vector<double> closes;  // trailing weekly closes, grown as we walk
    closes.reserve(weeks.size());

    double acc = 0.0;
    for (const auto& w : weeks) {
        GateDecision lg{true, 0.0, 0.0}, sg{true, 0.0, 0.0};  // warmup: trade ungated
        if (closes.size() >= gc.min_history) {
            std::size_t take = closes.size();
            if (gc.scheme.kind == calibrate::SchemeKind::rolling)
                take = std::min<std::size_t>(take, std::size_t(gc.scheme.window_weeks) + 1);
            calibrate::SampledSeries hist{
                {closes.end() - std::ptrdiff_t(take), closes.end()}, 1.0};
            const auto fit = calibrate::mle_fit(hist);
            lg = gate_week(fit, Side::long_side, w.zero_level - sp.d_pips * kPip,
                           sp, gc.pc_floor);
            sg = gate_week(fit, Side::short_side, w.zero_level + sp.u_pips * kPip,
                           sp, gc.pc_floor);
        }
        EngineConfig week_ec = ec;
        week_ec.allow_long = ec.allow_long && lg.open;
        week_ec.allow_short = ec.allow_short && sg.open;

        g.result.outcomes.push_back(run_week(w, sp, cm, week_ec));
        acc += g.result.outcomes.back().pnl_currency;
        g.result.cumulative.push_back(acc);
        g.long_gate.push_back(lg);
        g.short_gate.push_back(sg);
        g.gated.push_back(((ec.allow_long && !week_ec.allow_long) ||
                           (ec.allow_short && !week_ec.allow_short))
                              ? 1 : 0);

        if (!w.samples.empty()) closes.push_back(w.samples.back().close);
    }
    g.result.total_currency = acc;
    g.result.mean_weekly_currency = weeks.empty() ? 0.0 : acc / double(weeks.size());
    return g;
}

// ---- profit-call frequency diagnostic ----------------------------------------

PcFrequencyReport pc_frequency_report(std::span<const double> probs,
                                      std::span<const std::uint8_t> pc_outcomes) {
    if (probs.size() != pc_outcomes.size())
        throw std::invalid_argument("pc_frequency_report: size mismatch");
    if (probs.empty()) throw std::invalid_argument("pc_frequency_report: empty input");
    PcFrequencyReport rep;
    rep.n = probs.size();

    std::size_t hits = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("pc_frequency_report: probability outside [0,1]");
        rep.sum_p += p;
        rep.sum_pq += p * (1.0 - p);
        hits += pc_outcomes[i] ? 1 : 0;
    }
    const double n = double(rep.n);
    rep.theoretical_mean = rep.sum_p / n;
    rep.theoretical_variance = rep.sum_pq / n;
    rep.actual_frequency = double(hits) / n;
    // Unbiased sample variance of the 0/1 indicators: k(n-k)/(n(n-1)).
    rep.actual_variance =
        rep.n > 1 ? double(hits) * double(rep.n - hits) / (n * (n - 1.0)) : 0.0;
    return rep;
}

}  // namespace meanrev::bt
