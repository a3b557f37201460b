#pragma once

#include "plab/harness.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace plab
{
    struct PriceTable
    {
        std::vector<std::chrono::year_month_day> dates;
        /// T x N, all positive.
        Eigen::MatrixXd prices;
        std::vector<std::string> labels;
    };

    /// Header "Date,<ticker>,..." (Date matched case-insensitively), one
    /// ISO-8601 date and N prices per row. Accepts LF or CRLF and a UTF-8 BOM.
    /// Throws ParseError (with 1-based row/column), OrderingError for
    /// non-increasing dates and DomainError for prices <= 0.
    PriceTable parse_prices_csv(std::string_view text);
    PriceTable load_prices_csv(const std::filesystem::path &path);

    /// Writes the table in the format `load_prices_csv` reads (17 significant digits).
    void write_prices_csv(const PriceTable &table, const std::filesystem::path &path);

    /// r_t = (p_t - p_{t-1}) / p_{t-1}; a (T - 1) x N matrix with the table's labels.
    ReturnMatrix prices_to_returns(const PriceTable &table);

    /// Compounds `returns` from `initial` on consecutive days starting at `start`.
    PriceTable returns_to_prices(const ReturnMatrix &returns, double initial = 100.0,
                                 std::chrono::year_month_day start = std::chrono::year{2019} / 1 / 1);

    /// The simulation pipeline on the table's returns, treated as run 0.
    RunReport run_backtest(const PriceTable &table, const ScenarioConfig &cfg, const Method &method);
    /// Every configured method; each report covers the single historical run.
    SweepReport run_backtest_sweep(const PriceTable &table, const ScenarioConfig &cfg);
}
