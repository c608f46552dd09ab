// meanrev: command-line front end. All real work lives in the library's
// run_command; this file only maps argv onto a RunConfig.
//
// Both spellings are accepted:
//   meanrev backtest --data weeks.csv
//   meanrev --command backtest --data weeks.csv

#include <iostream>

#include "CLI11.hpp"
#include "meanrev/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"weekly mean-reversion FX strategy toolkit"};
    app.set_config("--config", "", "read options from an INI/TOML file");

    meanrev::cli::RunConfig cfg;

    app.add_option("--command", cfg.command,
                   "calibrate|dist|simulate|backtest|optimize|walkforward|pcreport");

    app.add_option("--data", cfg.data_path,
                   "OHLC candle CSV (timestamp,open,high,low,close; UTC seconds)");
    app.add_option("--ticks", cfg.tick_path,
                   "tick CSV (timestamp,price); takes precedence over --data");
    app.add_option("--out", cfg.out_path,
                   "write the report to this file instead of stdout");
    app.add_option("--format", cfg.format, "report format: csv or json")
        ->capture_default_str();

    app.add_option("-u,--u", cfg.sp.u_pips,
                   "short entry offset above the weekly open, pips")
        ->capture_default_str();
    app.add_option("-d,--d", cfg.sp.d_pips,
                   "long entry offset below the weekly open, pips")
        ->capture_default_str();
    app.add_option("--ts", cfg.sp.ts_pips, "trailing stop width, pips")
        ->capture_default_str();
    app.add_option("--pc", cfg.sp.pc_pips, "profit call level, pips above the open")
        ->capture_default_str();

    app.add_option("--grid", cfg.grid_spec,
                   "search ranges, e.g. u=10:60,d=10:60,ts=40:70:5,pc=+0:+15 "
                   "('+' = offset from ts)");

    app.add_option("--theta", cfg.theta, "long-term mean level");
    app.add_option("--lambda", cfg.lambda, "mean-reversion rate, per week");
    app.add_option("--sigma", cfg.sigma, "volatility, per sqrt(week)");
    app.add_option("--x0", cfg.x0, "position opening level");
    app.add_option("--grid-size", cfg.grid_size, "density table resolution")
        ->capture_default_str();

    app.add_option("--scheme", cfg.scheme,
                   "estimation window: rolling[:N] or expanding")
        ->capture_default_str();
    app.add_option("--step", cfg.cal_step, "samples between successive estimates")
        ->capture_default_str();

    app.add_option("--paths", cfg.paths, "number of simulated paths")
        ->capture_default_str();
    app.add_option("--dt", cfg.dt, "simulation step, weeks")->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();

    app.add_option("--lookback", cfg.lookback, "walk-forward fitting window, periods")
        ->capture_default_str();
    app.add_option("--period-weeks", cfg.period_weeks, "weeks per walk-forward period")
        ->capture_default_str();
    app.add_flag("--gate", cfg.gate,
                 "skip weeks the fitted model scores as unprofitable");
    app.add_option("--pc-floor", cfg.pc_floor,
                   "minimum predicted profit-call probability when gating")
        ->capture_default_str();
    app.add_flag("--ts-first", cfg.ts_first,
                 "check the trailing stop before the profit call inside a candle");
    app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)")
        ->capture_default_str();

    app.add_option("--notional", cfg.cost.position_notional,
                   "position margin, account currency")
        ->capture_default_str();
    app.add_option("--leverage", cfg.cost.leverage, "broker leverage")
        ->capture_default_str();
    app.add_option("--commission-rate", cfg.cost.overnight_commission_rate,
                   "overnight commission per night, fraction of notional")
        ->capture_default_str();

    // Subcommand sugar: empty shells that pick the command and let every
    // option fall through to the main app.
    for (const char* name : {"calibrate", "dist", "simulate", "backtest",
                             "optimize", "walkforward", "pcreport"}) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
        sub->callback([&cfg, name] { cfg.command = name; });
    }
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return meanrev::cli::exit_usage;
    }

    if (cfg.command.empty()) {
        std::cerr << "error: usage: no command given (try --help)\n";
        return meanrev::cli::exit_usage;
    }
    return meanrev::cli::run_command(cfg, std::cout, std::cerr);
}
