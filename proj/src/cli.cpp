#include "meanrev/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string_view>

#include "meanrev/dist.hpp"
#include "meanrev/io.hpp"
#include "meanrev/simulate.hpp"

namespace meanrev::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int parse_int(std::string_view s, const char* what) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw UsageError(std::string("bad integer for ") + what + ": '" +
                         std::string(s) + "'");
    return v;
}

std::vector<bt::WeekSession> load_weeks(const RunConfig& cfg) {
    if (cfg.data_path.empty() && cfg.tick_path.empty())
        throw UsageError("this command needs --data (candles) or --ticks");
    const auto records = cfg.tick_path.empty()
                             ? io::read_candle_csv(cfg.data_path)
                             : io::read_tick_csv(cfg.tick_path);
    auto weeks = io::to_week_sessions(records);
    if (weeks.empty()) throw DomainError("no in-session data rows");
    return weeks;
}

void require_ou(const RunConfig& cfg) {
    if (std::isnan(cfg.theta) || std::isnan(cfg.lambda) || std::isnan(cfg.sigma) ||
        std::isnan(cfg.x0))
        throw UsageError("this command needs --theta, --lambda, --sigma and --x0");
    if (!(cfg.sigma > 0.0)) throw DomainError("sigma must be positive");
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& payload) {
    if (cfg.out_path.empty()) {
        out << payload;
        return;
    }
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) throw io::FileError("cannot write '" + cfg.out_path + "'");
    f << payload;
}

bool want_json(const RunConfig& cfg) {
    if (cfg.format == "json") return true;
    if (cfg.format == "csv") return false;
    throw UsageError("--format must be csv or json");
}

}  // namespace

bt::ParamGrid parse_grid(const std::string& spec) {
    bt::ParamGrid g = bt::ParamGrid::defaults();
    if (spec.empty()) return g;

    std::string_view rest = spec;
    while (!rest.empty()) {
        const std::size_t comma = rest.find(',');
        std::string_view tok = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{}
                                               : rest.substr(comma + 1);
        const std::size_t eq = tok.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("grid token '" + std::string(tok) + "' lacks '='");
        const std::string_view axis = tok.substr(0, eq);
        std::string_view val = tok.substr(eq + 1);

        bool relative = false;
        std::string cleaned;
        if (axis == "pc") {
            // '+' prefixes mean "offset from TS"; bare numbers are absolute.
            relative = !val.empty() && val.front() == '+';
            for (char c : val)
                if (c != '+') cleaned += c;
            val = cleaned;
        }
        bt::Range r;
        const std::size_t c1 = val.find(':');
        if (c1 == std::string_view::npos)
            throw UsageError("grid range '" + std::string(val) + "' lacks ':'");
        const std::size_t c2 = val.find(':', c1 + 1);
        r.lo = parse_int(val.substr(0, c1), "grid lo");
        r.hi = parse_int(c2 == std::string_view::npos
                             ? val.substr(c1 + 1)
                             : val.substr(c1 + 1, c2 - c1 - 1),
                         "grid hi");
        r.step = c2 == std::string_view::npos
                     ? 1
                     : parse_int(val.substr(c2 + 1), "grid step");
        if (r.step <= 0 || r.hi < r.lo)
            throw UsageError("grid range must have lo <= hi and step >= 1");

        if (axis == "u") g.u = r;
        else if (axis == "d") g.d = r;
        else if (axis == "ts") g.ts = r;
        else if (axis == "pc") { g.pc = r; g.pc_relative = relative; }
        else throw UsageError("unknown grid axis '" + std::string(axis) + "'");
    }
    return g;
}

calibrate::EstimationScheme parse_scheme(const std::string& spec) {
    calibrate::EstimationScheme s;
    if (spec == "expanding") {
        s.kind = calibrate::SchemeKind::expanding;
        return s;
    }
    if (spec == "rolling") return s;  // default window
    if (spec.rfind("rolling:", 0) == 0) {
        s.window_weeks = parse_int(std::string_view(spec).substr(8), "window");
        if (s.window_weeks < 4) throw UsageError("rolling window must be >= 4 weeks");
        return s;
    }
    throw UsageError("scheme must be 'rolling[:N]' or 'expanding'");
}

namespace {

bt::EngineConfig make_engine(const RunConfig& cfg) {
    bt::EngineConfig ec;
    ec.pc_before_ts = !cfg.ts_first;
    return ec;
}

int cmd_calibrate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.data_path.empty() && cfg.tick_path.empty())
        throw UsageError("calibrate needs --data or --ticks");
    const auto records = cfg.tick_path.empty()
                             ? io::read_candle_csv(cfg.data_path)
                             : io::read_tick_csv(cfg.tick_path);
    if (records.size() < 3) throw DomainError("need at least 3 samples to calibrate");

    // Sampling step inferred from the median spacing, expressed in weeks.
    std::vector<std::int64_t> gaps;
    gaps.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i)
        gaps.push_back(records[i].ts - records[i - 1].ts);
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double delta = double(gaps[gaps.size() / 2]) / 604800.0;

    calibrate::SampledSeries series;
    series.delta = delta;
    series.values.reserve(records.size());
    for (const auto& r : records) series.values.push_back(r.close);

    const auto scheme = parse_scheme(cfg.scheme);
    if (cfg.cal_step < 1) throw UsageError("--step must be >= 1");
    const auto points = calibrate::rolling_estimates(series, scheme,
                                                     std::size_t(cfg.cal_step));
    if (points.empty())
        throw DomainError("series shorter than one estimation window");

    std::vector<io::CalibrationRow> rows;
    rows.reserve(points.size());
    for (const auto& p : points)
        rows.push_back({records[p.index].ts, p.index, p.fit});
    emit(cfg, out, want_json(cfg) ? io::calibration_to_json(rows)
                                  : io::calibration_to_csv(rows));
    return exit_ok;
}

int cmd_dist(const RunConfig& cfg, std::ostream& out) {
    require_ou(cfg);
    if (!(cfg.lambda > 0.0))
        throw DomainError("model is not mean-reverting (lambda <= 0); "
                          "the running-max law is undefined");
    cfg.sp.validate();

    dist::StoppedMaxProblem prob{{cfg.theta, cfg.lambda, cfg.sigma},
                                 cfg.x0, cfg.sp.ts_pips * kPip};
    const auto rd = dist::return_distribution(prob, cfg.sp.ts_pips, cfg.sp.pc_pips,
                                              cfg.grid_size);
    const double p_pc = rd.pc_atom;
    const double e_pips = dist::expected_weekly_return(prob, cfg.sp.ts_pips,
                                                       cfg.sp.pc_pips);

    std::string s;
    if (want_json(cfg)) {
        s = "{\"theta\":" + io::fmt_double(cfg.theta) +
            ",\"lambda\":" + io::fmt_double(cfg.lambda) +
            ",\"sigma\":" + io::fmt_double(cfg.sigma) +
            ",\"x0\":" + io::fmt_double(cfg.x0) +
            ",\"ts\":" + std::to_string(cfg.sp.ts_pips) +
            ",\"pc\":" + std::to_string(cfg.sp.pc_pips) +
            ",\"pc_probability\":" + io::fmt_double(p_pc) +
            ",\"expected_weekly_return_pips\":" + io::fmt_double(e_pips) +
            ",\"pc_atom\":" + io::fmt_double(rd.pc_atom) +
            ",\"grid_pips\":[";
        for (std::size_t i = 0; i < rd.grid.size(); ++i) {
            if (i) s += ',';
            s += io::fmt_double(rd.grid[i]);
        }
        s += "],\"density_per_pip\":[";
        for (std::size_t i = 0; i < rd.density.size(); ++i) {
            if (i) s += ',';
            s += io::fmt_double(rd.density[i]);
        }
        s += "]}";
    } else {
        // density rows, then the atom row, then the summary rows — one table.
        s = "kind,return_pips,value\n";
        for (std::size_t i = 0; i < rd.grid.size(); ++i)
            s += "density," + io::fmt_double(rd.grid[i]) + "," +
                 io::fmt_double(rd.density[i]) + "\n";
        s += "atom," + std::to_string(cfg.sp.pc_pips) + "," +
             io::fmt_double(rd.pc_atom) + "\n";
        s += "summary_pc_probability,," + io::fmt_double(p_pc) + "\n";
        s += "summary_expected_weekly_return_pips,," + io::fmt_double(e_pips) + "\n";
    }
    emit(cfg, out, s);
    return exit_ok;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_ou(cfg);
    cfg.sp.validate();
    sim::SimConfig sc;
    sc.ou = {cfg.theta, cfg.lambda, cfg.sigma};
    sc.x0 = cfg.x0;
    sc.dt = cfg.dt;
    sc.n_paths = cfg.paths;
    sc.seed = cfg.seed;
    sc.threads = cfg.threads;
    const auto res = sim::mc_weekly_returns(sc, cfg.sp.ts_pips, cfg.sp.pc_pips);
    if (res.censored * 100 > cfg.paths)
        err << "warning: " << res.censored
            << " paths hit the step cap before any exit rule fired\n";

    double mean = 0.0;
    for (double p : res.pips) mean += p;
    mean /= double(res.pips.size());
    double var = 0.0;
    for (double p : res.pips) var += (p - mean) * (p - mean);
    var /= res.pips.size() > 1 ? double(res.pips.size() - 1) : 1.0;
    const double se = std::sqrt(var / double(res.pips.size()));
    std::uint64_t hits = 0;
    for (auto h : res.pc_hit) hits += h;
    const double pc_freq = double(hits) / double(res.pc_hit.size());

    std::string s;
    if (want_json(cfg)) {
        s = "{\"paths\":" + std::to_string(cfg.paths) +
            ",\"seed\":" + std::to_string(cfg.seed) +
            ",\"dt\":" + io::fmt_double(cfg.dt) +
            ",\"mean_pips\":" + io::fmt_double(mean) +
            ",\"se_pips\":" + io::fmt_double(se) +
            ",\"pc_frequency\":" + io::fmt_double(pc_freq) +
            ",\"censored\":" + std::to_string(res.censored) + "}";
    } else {
        s = "paths,seed,dt,mean_pips,se_pips,pc_frequency,censored\n" +
            std::to_string(cfg.paths) + "," + std::to_string(cfg.seed) + "," +
            io::fmt_double(cfg.dt) + "," + io::fmt_double(mean) + "," +
            io::fmt_double(se) + "," + io::fmt_double(pc_freq) + "," +
            std::to_string(res.censored) + "\n";
    }
    emit(cfg, out, s);
    return exit_ok;
}

int cmd_backtest(const RunConfig& cfg, std::ostream& out) {
    const auto weeks = load_weeks(cfg);
    cfg.sp.validate();
    const auto ec = make_engine(cfg);

    bt::BacktestResult res;
    if (cfg.gate) {
        bt::GateConfig gc;
        gc.scheme = parse_scheme(cfg.scheme);
        gc.pc_floor = cfg.pc_floor;
        res = bt::run_backtest_gated(weeks, cfg.sp, cfg.cost, gc, ec).result;
    } else {
        res = bt::run_backtest(weeks, cfg.sp, cfg.cost, ec);
    }
    emit(cfg, out, want_json(cfg) ? io::outcomes_to_json(res.outcomes, res.cumulative)
                                  : io::outcomes_to_csv(res.outcomes, res.cumulative));
    return exit_ok;
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out) {
    const auto weeks = load_weeks(cfg);
    const auto grid = parse_grid(cfg.grid_spec);
    const auto choice = bt::optimize_grid(weeks, grid, cfg.cost, make_engine(cfg),
                                          cfg.threads);
    std::string s;
    if (want_json(cfg)) {
        s = "{\"u\":" + std::to_string(choice.params.u_pips) +
            ",\"d\":" + std::to_string(choice.params.d_pips) +
            ",\"ts\":" + std::to_string(choice.params.ts_pips) +
            ",\"pc\":" + std::to_string(choice.params.pc_pips) +
            ",\"mean_weekly_currency\":" +
            io::fmt_double(choice.mean_weekly_currency) + "}";
    } else {
        s = "u,d,ts,pc,mean_weekly_currency\n" +
            std::to_string(choice.params.u_pips) + "," +
            std::to_string(choice.params.d_pips) + "," +
            std::to_string(choice.params.ts_pips) + "," +
            std::to_string(choice.params.pc_pips) + "," +
            io::fmt_double(choice.mean_weekly_currency) + "\n";
    }
    emit(cfg, out, s);
    return exit_ok;
}

int cmd_walkforward(const RunConfig& cfg, std::ostream& out) {
    const auto weeks = load_weeks(cfg);
    const auto grid = parse_grid(cfg.grid_spec);
    if (cfg.lookback < 1) throw UsageError("--lookback must be >= 1");
    if (cfg.period_weeks < 1) throw UsageError("--period-weeks must be >= 1");
    const auto rep = bt::walk_forward(weeks, cfg.lookback, grid, cfg.cost,
                                      cfg.period_weeks, make_engine(cfg),
                                      cfg.threads);
    if (rep.rows.empty())
        throw DomainError("not enough weeks for one in-sample + out-of-sample block");
    emit(cfg, out, want_json(cfg) ? io::walkforward_to_json(rep)
                                  : io::walkforward_to_csv(rep));
    return exit_ok;
}

int cmd_pcreport(const RunConfig& cfg, std::ostream& out) {
    const auto weeks = load_weeks(cfg);
    cfg.sp.validate();
    const auto ec = make_engine(cfg);
    const auto scheme = parse_scheme(cfg.scheme);
    const int window = scheme.kind == calibrate::SchemeKind::rolling
                           ? scheme.window_weeks
                           : calibrate::EstimationScheme{}.window_weeks;
    const std::size_t min_history = std::size_t(window) + 1;

    // Predicted profit-call probability (under both estimation schemes) vs
    // realized outcome, collected over the weeks where a position actually
    // opened and both fits are valid — so all three columns share one sample.
    std::vector<double> probs_roll, probs_exp;
    std::vector<std::uint8_t> hits;
    std::vector<double> closes;
    for (const auto& w : weeks) {
        if (closes.size() >= min_history) {
            calibrate::SampledSeries roll_hist{
                {closes.end() - std::ptrdiff_t(min_history), closes.end()}, 1.0};
            calibrate::SampledSeries exp_hist{closes, 1.0};
            const auto fit_roll = calibrate::mle_fit(roll_hist);
            const auto fit_exp = calibrate::mle_fit(exp_hist);
            if (calibrate::validity_gate(fit_roll) &&
                calibrate::validity_gate(fit_exp)) {
                const auto o = bt::run_week(w, cfg.sp, cfg.cost, ec);
                if (o.side != bt::Side::none) {
                    probs_roll.push_back(
                        bt::gate_week(fit_roll, o.side, o.open_level, cfg.sp, 0.0)
                            .pc_prob);
                    probs_exp.push_back(
                        bt::gate_week(fit_exp, o.side, o.open_level, cfg.sp, 0.0)
                            .pc_prob);
                    hits.push_back(o.exit_reason == bt::ExitReason::profit_call ? 1
                                                                                : 0);
                }
            }
        }
        if (!w.samples.empty()) closes.push_back(w.samples.back().close);
    }
    if (hits.empty())
        throw DomainError("no opened weeks with valid model fits under both schemes");

    const auto rep_roll = bt::pc_frequency_report(probs_roll, hits);
    const auto rep_exp = bt::pc_frequency_report(probs_exp, hits);
    const std::string roll_label = "rolling_" + std::to_string(window) + "w";
    std::string s;
    if (want_json(cfg)) {
        s = "{\"n\":" + std::to_string(rep_roll.n) +
            ",\"actual_frequency\":" + io::fmt_double(rep_roll.actual_frequency) +
            ",\"actual_variance\":" + io::fmt_double(rep_roll.actual_variance) +
            ",\"" + roll_label + "\":{\"theoretical_mean\":" +
            io::fmt_double(rep_roll.theoretical_mean) +
            ",\"theoretical_variance\":" +
            io::fmt_double(rep_roll.theoretical_variance) +
            "},\"expanding\":{\"theoretical_mean\":" +
            io::fmt_double(rep_exp.theoretical_mean) +
            ",\"theoretical_variance\":" +
            io::fmt_double(rep_exp.theoretical_variance) + "}}";
    } else {
        s = "metric,actual," + roll_label + ",expanding\n";
        s += "pc_frequency_mean," + io::fmt_double(rep_roll.actual_frequency) + "," +
             io::fmt_double(rep_roll.theoretical_mean) + "," +
             io::fmt_double(rep_exp.theoretical_mean) + "\n";
        s += "pc_frequency_variance," + io::fmt_double(rep_roll.actual_variance) +
             "," + io::fmt_double(rep_roll.theoretical_variance) + "," +
             io::fmt_double(rep_exp.theoretical_variance) + "\n";
        s += "weeks," + std::to_string(rep_roll.n) + "," +
             std::to_string(rep_roll.n) + "," + std::to_string(rep_roll.n) + "\n";
    }
    emit(cfg, out, s);
    return exit_ok;
}

int fail(std::ostream& err, int code, const char* category, const std::string& msg) {
    err << "error: " << category << ": " << msg << "\n";
    return code;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "calibrate") return cmd_calibrate(cfg, out);
        if (cfg.command == "dist") return cmd_dist(cfg, out);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
        if (cfg.command == "backtest") return cmd_backtest(cfg, out);
        if (cfg.command == "optimize") return cmd_optimize(cfg, out);
        if (cfg.command == "walkforward") return cmd_walkforward(cfg, out);
        if (cfg.command == "pcreport") return cmd_pcreport(cfg, out);
        return fail(err, exit_usage, "usage",
                    "unknown command '" + cfg.command +
                        "' (expected calibrate|dist|simulate|backtest|optimize|"
                        "walkforward|pcreport)");
    } catch (const UsageError& e) {
        return fail(err, exit_usage, "usage", e.what());
    } catch (const io::ParseError& e) {
        return fail(err, exit_data, "data", e.what());
    } catch (const io::FileError& e) {
        return fail(err, exit_data, "data", e.what());
    } catch (const DomainError& e) {
        return fail(err, exit_domain, "domain", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(err, exit_domain, "domain", e.what());
    } catch (const std::exception& e) {
        return fail(err, exit_internal, "internal", e.what());
    }
}

}  // namespace meanrev::cli
