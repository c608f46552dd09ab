#include "meanrev/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string_view>

namespace meanrev::io {

namespace {

constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kSessionOpen = 21 * 3600;  // Sunday 21:00 UTC

// Day-of-week for an epoch day; day 0 (1970-01-01) was a Thursday.
int day_of_week(std::int64_t epoch_day) {
    return int((epoch_day + 4) % 7);  // 0 = Sunday
}

// Civil-from-days (Howard Hinnant's public-domain algorithm).
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = unsigned(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = std::int64_t(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = int(yy + (m <= 2));
}

std::string iso_date(std::int64_t epoch_day) {
    int y; unsigned m, d;
    civil_from_days(epoch_day, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

std::int64_t parse_ts(std::string_view f, std::size_t line) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || p != f.data() + f.size())
        throw ParseError("bad timestamp '" + std::string(f) + "'", line);
    return v;
}

double parse_price(std::string_view f, std::size_t line) {
    double v = 0;
    const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(v) || v <= 0.0)
        throw ParseError("bad price '" + std::string(f) + "'", line);
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

ParseError::ParseError(const std::string& msg, std::size_t l)
    : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}

std::vector<CandleRecord> read_candle_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || strip_cr(lines[0]) != "timestamp,open,high,low,close")
        throw ParseError("expected header 'timestamp,open,high,low,close'", 1);

    std::vector<CandleRecord> out;
    out.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = strip_cr(lines[i]);
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 5) throw ParseError("expected 5 fields", i + 1);
        CandleRecord r;
        r.ts = parse_ts(f[0], i + 1);
        r.open = parse_price(f[1], i + 1);
        r.high = parse_price(f[2], i + 1);
        r.low = parse_price(f[3], i + 1);
        r.close = parse_price(f[4], i + 1);
        if (r.low > r.high || r.open > r.high || r.open < r.low ||
            r.close > r.high || r.close < r.low)
            throw ParseError("inconsistent OHLC", i + 1);
        if (!out.empty() && r.ts <= out.back().ts)
            throw ParseError("timestamps must be strictly increasing", i + 1);
        out.push_back(r);
    }
    return out;
}

std::vector<CandleRecord> read_tick_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || strip_cr(lines[0]) != "timestamp,price")
        throw ParseError("expected header 'timestamp,price'", 1);

    std::vector<CandleRecord> out;
    out.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = strip_cr(lines[i]);
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 2) throw ParseError("expected 2 fields", i + 1);
        const std::int64_t ts = parse_ts(f[0], i + 1);
        const double p = parse_price(f[1], i + 1);
        if (!out.empty() && ts <= out.back().ts)
            throw ParseError("timestamps must be strictly increasing", i + 1);
        out.push_back({ts, p, p, p, p});
    }
    return out;
}

std::vector<bt::WeekSession> to_week_sessions(std::span<const CandleRecord> records,
                                              std::size_t* dropped) {
    std::vector<bt::WeekSession> out;
    std::size_t n_dropped = 0;

    std::int64_t cur_week = -1;
    for (const auto& r : records) {
        const std::int64_t day = r.ts / kDay;
        const std::int64_t sec = r.ts % kDay;
        const int dow = day_of_week(day);

        const bool inside = (dow == 0 && sec >= kSessionOpen) ||
                            (dow >= 1 && dow <= 4) ||
                            (dow == 5 && sec < kSessionOpen);
        if (!inside) {
            ++n_dropped;
            continue;
        }
        // Sunday that opened this trading week.
        const std::int64_t sunday = dow == 0 ? day : day - dow;
        if (sunday != cur_week) {
            cur_week = sunday;
            bt::WeekSession w;
            w.id = iso_date(sunday + 1);  // the week's Monday
            w.zero_level = r.open;
            out.push_back(std::move(w));
        }
        out.back().samples.push_back({r.ts, r.open, r.high, r.low, r.close});
    }
    if (dropped) *dropped = n_dropped;
    return out;
}

std::string sessions_to_csv(std::span<const bt::WeekSession> sessions) {
    std::string s = "timestamp,open,high,low,close\n";
    for (const auto& w : sessions)
        for (const auto& c : w.samples) {
            s += std::to_string(c.ts);
            s += ',';  s += fmt_double(c.open);
            s += ',';  s += fmt_double(c.high);
            s += ',';  s += fmt_double(c.low);
            s += ',';  s += fmt_double(c.close);
            s += '\n';
        }
    return s;
}

// ---- formatting -------------------------------------------------------

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;  // unreachable: 17 digits always round-trip
}

namespace {

// JSON has no NaN/inf literals; non-finite numbers serialize as null.
std::string json_num(double v) { return std::isfinite(v) ? fmt_double(v) : "null"; }

std::string json_str(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') { out += '\\'; out += c; }
        else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
        } else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

const char* side_name(bt::Side s) {
    switch (s) {
        case bt::Side::long_side: return "long";
        case bt::Side::short_side: return "short";
        default: return "none";
    }
}

const char* exit_name(bt::ExitReason r) {
    switch (r) {
        case bt::ExitReason::trailing_stop: return "trailing_stop";
        case bt::ExitReason::profit_call: return "profit_call";
        case bt::ExitReason::week_close: return "week_close";
        default: return "not_opened";
    }
}

std::string outcomes_to_csv(std::span<const bt::TradeOutcome> outcomes,
                            std::span<const double> cumulative) {
    if (outcomes.size() != cumulative.size())
        throw std::invalid_argument("outcomes_to_csv: cumulative size mismatch");
    std::string s =
        "week,side,exit,open_level,exit_level,best_excursion_pips,pnl_pips,"
        "pnl_currency,nights_held,open_ts,exit_ts,cumulative_currency\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        s += o.week_id;
        s += ','; s += side_name(o.side);
        s += ','; s += exit_name(o.exit_reason);
        s += ','; s += fmt_double(o.open_level);
        s += ','; s += fmt_double(o.exit_level);
        s += ','; s += fmt_double(o.best_excursion_pips);
        s += ','; s += fmt_double(o.pnl_pips);
        s += ','; s += fmt_double(o.pnl_currency);
        s += ','; s += std::to_string(o.nights_held);
        s += ','; s += std::to_string(o.open_ts);
        s += ','; s += std::to_string(o.exit_ts);
        s += ','; s += fmt_double(cumulative[i]);
        s += '\n';
    }
    return s;
}

std::string outcomes_to_json(std::span<const bt::TradeOutcome> outcomes,
                             std::span<const double> cumulative) {
    if (outcomes.size() != cumulative.size())
        throw std::invalid_argument("outcomes_to_json: cumulative size mismatch");
    std::string s = "{\"outcomes\":[";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (i) s += ',';
        s += "{\"week\":" + json_str(o.week_id);
        s += ",\"side\":\""; s += side_name(o.side); s += '"';
        s += ",\"exit\":\""; s += exit_name(o.exit_reason); s += '"';
        s += ",\"open_level\":" + json_num(o.open_level);
        s += ",\"exit_level\":" + json_num(o.exit_level);
        s += ",\"best_excursion_pips\":" + json_num(o.best_excursion_pips);
        s += ",\"pnl_pips\":" + json_num(o.pnl_pips);
        s += ",\"pnl_currency\":" + json_num(o.pnl_currency);
        s += ",\"nights_held\":" + std::to_string(o.nights_held);
        s += ",\"open_ts\":" + std::to_string(o.open_ts);
        s += ",\"exit_ts\":" + std::to_string(o.exit_ts);
        s += ",\"cumulative_currency\":" + json_num(cumulative[i]);
        s += '}';
    }
    s += "],\"total_currency\":";
    s += json_num(cumulative.empty() ? 0.0 : cumulative.back());
    s += '}';
    return s;
}

std::string walkforward_to_csv(const bt::WalkForwardReport& report) {
    std::string s = "period,u,d,ts,pc,estimated_mean,actual_mean,weeks_in,weeks_out\n";
    for (const auto& r : report.rows) {
        s += r.period;
        s += ','; s += std::to_string(r.params.u_pips);
        s += ','; s += std::to_string(r.params.d_pips);
        s += ','; s += std::to_string(r.params.ts_pips);
        s += ','; s += std::to_string(r.params.pc_pips);
        s += ','; s += fmt_double(r.estimated_mean);
        s += ','; s += fmt_double(r.actual_mean);
        s += ','; s += std::to_string(r.weeks_in);
        s += ','; s += std::to_string(r.weeks_out);
        s += '\n';
    }
    return s;
}

std::string walkforward_to_json(const bt::WalkForwardReport& report) {
    std::string s = "{\"rows\":[";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        if (i) s += ',';
        s += "{\"period\":" + json_str(r.period);
        s += ",\"u\":" + std::to_string(r.params.u_pips);
        s += ",\"d\":" + std::to_string(r.params.d_pips);
        s += ",\"ts\":" + std::to_string(r.params.ts_pips);
        s += ",\"pc\":" + std::to_string(r.params.pc_pips);
        s += ",\"estimated_mean\":" + json_num(r.estimated_mean);
        s += ",\"actual_mean\":" + json_num(r.actual_mean);
        s += ",\"weeks_in\":" + std::to_string(r.weeks_in);
        s += ",\"weeks_out\":" + std::to_string(r.weeks_out);
        s += '}';
    }
    s += "],\"total_actual_currency\":" + json_num(report.total_actual_currency);
    s += ",\"period_weeks\":" + std::to_string(report.period_weeks);
    s += ",\"lookback_periods\":" + std::to_string(report.lookback_periods);
    s += '}';
    return s;
}

std::string calibration_to_csv(std::span<const CalibrationRow> rows) {
    std::string s = "ts,index,theta,lambda,sigma,kappa,valid,n_obs,log_ratio_arg\n";
    for (const auto& r : rows) {
        const auto& p = r.fit.params;
        s += std::to_string(r.ts);
        s += ','; s += std::to_string(r.index);
        s += ','; s += fmt_double(p.theta);
        s += ','; s += fmt_double(p.lambda);
        s += ','; s += fmt_double(p.sigma);
        s += ','; s += fmt_double(r.fit.valid ? p.kappa() : NAN);
        s += ','; s += r.fit.valid ? "1" : "0";
        s += ','; s += std::to_string(r.fit.n_obs);
        s += ','; s += fmt_double(r.fit.log_ratio_arg);
        s += '\n';
    }
    return s;
}

std::string calibration_to_json(std::span<const CalibrationRow> rows) {
    std::string s = "{\"estimates\":[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& p = r.fit.params;
        if (i) s += ',';
        s += "{\"ts\":" + std::to_string(r.ts);
        s += ",\"index\":" + std::to_string(r.index);
        s += ",\"theta\":" + json_num(p.theta);
        s += ",\"lambda\":" + json_num(p.lambda);
        s += ",\"sigma\":" + json_num(p.sigma);
        s += ",\"kappa\":" + json_num(r.fit.valid ? p.kappa() : NAN);
        s += ",\"valid\":"; s += r.fit.valid ? "true" : "false";
        s += ",\"n_obs\":" + std::to_string(r.fit.n_obs);
        s += ",\"log_ratio_arg\":" + json_num(r.fit.log_ratio_arg);
        s += '}';
    }
    s += "]}";
    return s;
}

}  // namespace meanrev::io
