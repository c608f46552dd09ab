#pragma once

// CSV ingestion (OHLC candles and ticks), trading-week segmentation, and the
// round-trip-safe serializers behind the CLI commands.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "backtest.hpp"

namespace meanrev::io {

// Distinct failure categories so the CLI can map them to exit codes.
struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {  // malformed row; message carries the line
    ParseError(const std::string& msg, std::size_t line);
    std::size_t line = 0;
};

struct CandleRecord {
    std::int64_t ts = 0;  // UTC seconds since epoch
    double open = 0, high = 0, low = 0, close = 0;
};

/// Parse `timestamp,open,high,low,close` (header required). Validates OHLC
/// ordering and strictly increasing timestamps; throws ParseError with the
/// offending 1-based line number.
std::vector<CandleRecord> read_candle_csv(const std::string& path);

/// Parse `timestamp,price` ticks into degenerate candles.
std::vector<CandleRecord> read_tick_csv(const std::string& path);

/// Segment records into trading weeks (Sunday 21:00 UTC through Friday 21:00
/// UTC). Records outside the window (weekend) are dropped; the count of
/// dropped records is returned through `dropped` when non-null. Week id is
/// the UTC date of the week's Monday; zero_level is the first sample's open.
std::vector<bt::WeekSession> to_week_sessions(std::span<const CandleRecord> records,
                                              std::size_t* dropped = nullptr);

/// Inverse of ingestion for round-trip tests: sessions back to candle CSV.
std::string sessions_to_csv(std::span<const bt::WeekSession> sessions);

// ---- formatting -------------------------------------------------------

/// Round-trip-safe decimal rendering (shortest form that parses back to the
/// same double, up to 17 significant digits). Used by every serializer so
/// CSV and JSON carry identical numbers.
std::string fmt_double(double v);

std::string outcomes_to_csv(std::span<const bt::TradeOutcome> outcomes,
                            std::span<const double> cumulative);
std::string outcomes_to_json(std::span<const bt::TradeOutcome> outcomes,
                             std::span<const double> cumulative);

std::string walkforward_to_csv(const bt::WalkForwardReport& report);
std::string walkforward_to_json(const bt::WalkForwardReport& report);

struct CalibrationRow {
    std::int64_t ts = 0;       // timestamp of the anchoring sample
    std::size_t index = 0;
    calibrate::CalibrationResult fit;
};
std::string calibration_to_csv(std::span<const CalibrationRow> rows);
std::string calibration_to_json(std::span<const CalibrationRow> rows);

const char* side_name(bt::Side s);
const char* exit_name(bt::ExitReason r);

}  // namespace meanrev::io
