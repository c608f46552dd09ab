// Python bindings: the analytic law, the calibrator, the Monte Carlo engine
// and the weekly backtest, over plain lists/doubles so no numpy is required.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "meanrev/backtest.hpp"
#include "meanrev/calibrate.hpp"
#include "meanrev/dist.hpp"
#include "meanrev/io.hpp"
#include "meanrev/simulate.hpp"

namespace py = pybind11;
using namespace meanrev;

PYBIND11_MODULE(_meanrev, m) {
    m.doc() = "weekly mean-reversion FX strategy toolkit";

    py::class_<OUParams>(m, "OUParams")
        .def(py::init<double, double, double>(), py::arg("theta"),
             py::arg("lambda_"), py::arg("sigma"))
        .def_readwrite("theta", &OUParams::theta)
        .def_readwrite("lambda_", &OUParams::lambda)
        .def_readwrite("sigma", &OUParams::sigma)
        .def("kappa", &OUParams::kappa)
        .def("mean_reverting", &OUParams::mean_reverting)
        .def("__repr__", [](const OUParams& p) {
            return "OUParams(theta=" + io::fmt_double(p.theta) +
                   ", lambda_=" + io::fmt_double(p.lambda) +
                   ", sigma=" + io::fmt_double(p.sigma) + ")";
        });

    py::class_<dist::StoppedMaxProblem>(m, "StoppedMaxProblem")
        .def(py::init([](const OUParams& ou, double start, double drawdown) {
                 dist::StoppedMaxProblem p{ou, start, drawdown};
                 p.validate();
                 return p;
             }),
             py::arg("ou"), py::arg("start"), py::arg("drawdown"))
        .def_readonly("ou", &dist::StoppedMaxProblem::ou)
        .def_readonly("start", &dist::StoppedMaxProblem::start)
        .def_readonly("drawdown", &dist::StoppedMaxProblem::drawdown)
        .def("hazard", [](const dist::StoppedMaxProblem& p, double z) {
            return dist::hazard(p, z);
        })
        .def("cdf", [](const dist::StoppedMaxProblem& p, double v) {
            return dist::running_max_cdf(p, v);
        })
        .def("pdf", [](const dist::StoppedMaxProblem& p, double v) {
            return dist::running_max_pdf(p, v);
        })
        .def("cdf_grid",
             [](const dist::StoppedMaxProblem& p, const std::vector<double>& vs) {
                 return dist::running_max_cdf_grid(p, vs);
             })
        .def("pc_probability", [](const dist::StoppedMaxProblem& p, double pc) {
            return dist::pc_probability(p, pc);
        })
        .def("expected_weekly_return",
             [](const dist::StoppedMaxProblem& p, double ts, double pc) {
                 return dist::expected_weekly_return(p, ts, pc);
             },
             py::arg("ts_pips"), py::arg("pc_pips"))
        .def("mirror_short", &dist::mirror_short);

    py::class_<dist::ReturnDistribution>(m, "ReturnDistribution")
        .def_readonly("grid", &dist::ReturnDistribution::grid)
        .def_readonly("density", &dist::ReturnDistribution::density)
        .def_readonly("pc_atom", &dist::ReturnDistribution::pc_atom)
        .def_readonly("ts_pips", &dist::ReturnDistribution::ts_pips)
        .def_readonly("pc_pips", &dist::ReturnDistribution::pc_pips)
        .def("trapezoid_mass", &dist::ReturnDistribution::trapezoid_mass);

    m.def("return_distribution", &dist::return_distribution, py::arg("problem"),
          py::arg("ts_pips"), py::arg("pc_pips"), py::arg("grid_size") = 512);

    py::class_<calibrate::CalibrationResult>(m, "CalibrationResult")
        .def_readonly("params", &calibrate::CalibrationResult::params)
        .def_readonly("valid", &calibrate::CalibrationResult::valid)
        .def_readonly("n_obs", &calibrate::CalibrationResult::n_obs)
        .def_readonly("log_ratio_arg", &calibrate::CalibrationResult::log_ratio_arg);

    m.def(
        "mle_fit",
        [](const std::vector<double>& values, double delta) {
            return calibrate::mle_fit({values, delta});
        },
        py::arg("values"), py::arg("delta"),
        "fit the mean-reverting model to a uniformly sampled series "
        "(delta in weeks)");

    m.def(
        "simulate_weekly_returns",
        [](const OUParams& ou, double x0, double ts_pips, double pc_pips,
           std::uint64_t paths, double dt, std::uint64_t seed, int threads) {
            sim::SimConfig cfg;
            cfg.ou = ou;
            cfg.x0 = x0;
            cfg.dt = dt;
            cfg.n_paths = paths;
            cfg.seed = seed;
            cfg.threads = threads;
            auto r = sim::mc_weekly_returns(cfg, ts_pips, pc_pips);
            py::dict d;
            d["pips"] = r.pips;
            d["pc_hit"] = r.pc_hit;
            d["censored"] = r.censored;
            return d;
        },
        py::arg("ou"), py::arg("x0"), py::arg("ts_pips"), py::arg("pc_pips"),
        py::arg("paths") = 10000, py::arg("dt") = 1e-3, py::arg("seed") = 1,
        py::arg("threads") = 0);

    py::enum_<bt::Side>(m, "Side")
        .value("none", bt::Side::none)
        .value("long_side", bt::Side::long_side)
        .value("short_side", bt::Side::short_side);

    py::enum_<bt::ExitReason>(m, "ExitReason")
        .value("not_opened", bt::ExitReason::not_opened)
        .value("trailing_stop", bt::ExitReason::trailing_stop)
        .value("profit_call", bt::ExitReason::profit_call)
        .value("week_close", bt::ExitReason::week_close);

    py::class_<bt::TradeOutcome>(m, "TradeOutcome")
        .def_readonly("week_id", &bt::TradeOutcome::week_id)
        .def_readonly("side", &bt::TradeOutcome::side)
        .def_readonly("exit_reason", &bt::TradeOutcome::exit_reason)
        .def_readonly("open_level", &bt::TradeOutcome::open_level)
        .def_readonly("exit_level", &bt::TradeOutcome::exit_level)
        .def_readonly("best_excursion_pips", &bt::TradeOutcome::best_excursion_pips)
        .def_readonly("pnl_pips", &bt::TradeOutcome::pnl_pips)
        .def_readonly("pnl_currency", &bt::TradeOutcome::pnl_currency)
        .def_readonly("nights_held", &bt::TradeOutcome::nights_held)
        .def_readonly("open_ts", &bt::TradeOutcome::open_ts)
        .def_readonly("exit_ts", &bt::TradeOutcome::exit_ts);

    py::class_<bt::BacktestResult>(m, "BacktestResult")
        .def_readonly("outcomes", &bt::BacktestResult::outcomes)
        .def_readonly("cumulative", &bt::BacktestResult::cumulative)
        .def_readonly("total_currency", &bt::BacktestResult::total_currency)
        .def_readonly("mean_weekly_currency",
                      &bt::BacktestResult::mean_weekly_currency);

    m.def(
        "backtest_csv",
        [](const std::string& path, int u, int d, int ts, int pc, bool ticks) {
            const auto records =
                ticks ? io::read_tick_csv(path) : io::read_candle_csv(path);
            const auto weeks = io::to_week_sessions(records);
            return bt::run_backtest(weeks, {u, d, ts, pc}, {}, {});
        },
        py::arg("path"), py::arg("u") = 20, py::arg("d") = 20, py::arg("ts") = 50,
        py::arg("pc") = 55, py::arg("ticks") = false,
        "run the weekly strategy over a candle (or tick) CSV file");
}
