// Brute-force week replay used to cross-check the production engine on tick
// data. Written as a flat tick loop with explicit state, on purpose sharing
// no code (and no shape) with the engine's candle scanner.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace testsupport {

struct BruteTick {
    std::int64_t ts;
    double px;
};

struct BruteOutcome {
    int side = 0;    // 0 none, +1 long, -1 short
    int reason = 0;  // 0 not opened, 1 trailing stop, 2 profit call, 3 week close
    double entry = 0.0, exit = 0.0;
    double pnl_pips = 0.0, best_pips = 0.0;
    std::int64_t entry_ts = 0, exit_ts = 0;
};

inline BruteOutcome brute_scan(const std::vector<BruteTick>& ticks, double zero,
                               int u_pips, int d_pips, int ts_pips, int pc_pips,
                               bool pc_first = true, bool allow_long = true,
                               bool allow_short = true) {
    constexpr double pip = 1e-4;
    BruteOutcome o;
    if (ticks.empty()) return o;

    const double up = zero + u_pips * pip;
    const double dn = zero - d_pips * pip;
    const double ts = ts_pips * pip;

    std::size_t i = 0;
    for (; i < ticks.size(); ++i) {
        const double p = ticks[i].px;
        const bool s = allow_short && p >= up;
        const bool l = allow_long && p <= dn;
        if (s && l) throw std::logic_error("brute_scan: one tick hit both levels");
        if (s || l) {
            o.side = s ? -1 : +1;
            o.entry = s ? up : dn;
            o.entry_ts = ticks[i].ts;
            break;
        }
    }
    if (o.side == 0) return o;

    if (o.side > 0) {  // long
        const double pcl = o.entry + pc_pips * pip;
        double m = o.entry;
        for (; i < ticks.size(); ++i) {
            const double p = ticks[i].px;
            if (pc_first) {
                if (p >= pcl) {
                    if (p > m) m = p;
                    o.reason = 2;
                    o.exit = pcl;
                    break;
                }
                if (p > m) m = p;
                if (m - p >= ts) {
                    o.reason = 1;
                    o.exit = m - ts;
                    break;
                }
            } else {
                if (m - p >= ts) {
                    o.reason = 1;
                    o.exit = m - ts;
                    break;
                }
                if (p >= pcl) {
                    if (p > m) m = p;
                    o.reason = 2;
                    o.exit = pcl;
                    break;
                }
                if (p > m) m = p;
            }
        }
        if (o.reason == 0) {
            o.reason = 3;
            o.exit = ticks.back().px;
            o.exit_ts = ticks.back().ts;
        } else {
            o.exit_ts = ticks[i].ts;
        }
        o.best_pips = (m - o.entry) / pip;
        o.pnl_pips = (o.exit - o.entry) / pip;
    } else {  // short: same machine with the inequalities flipped
        const double pcl = o.entry - pc_pips * pip;
        double m = o.entry;
        for (; i < ticks.size(); ++i) {
            const double p = ticks[i].px;
            if (pc_first) {
                if (p <= pcl) {
                    if (p < m) m = p;
                    o.reason = 2;
                    o.exit = pcl;
                    break;
                }
                if (p < m) m = p;
                if (p - m >= ts) {
                    o.reason = 1;
                    o.exit = m + ts;
                    break;
                }
            } else {
                if (p - m >= ts) {
                    o.reason = 1;
                    o.exit = m + ts;
                    break;
                }
                if (p <= pcl) {
                    if (p < m) m = p;
                    o.reason = 2;
                    o.exit = pcl;
                    break;
                }
                if (p < m) m = p;
            }
        }
        if (o.reason == 0) {
            o.reason = 3;
            o.exit = ticks.back().px;
            o.exit_ts = ticks.back().ts;
        } else {
            o.exit_ts = ticks[i].ts;
        }
        o.best_pips = (o.entry - m) / pip;
        o.pnl_pips = (o.entry - o.exit) / pip;
    }
    return o;
}

}  // namespace testsupport
