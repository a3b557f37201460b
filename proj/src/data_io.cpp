#include "plab/data_io.hpp"

#include "plab/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plab
{
    namespace
    {
        std::string_view trim(std::string_view s)
        {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
                s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.remove_suffix(1);
            return s;
        }

        std::vector<std::string_view> split(std::string_view line)
        {
            std::vector<std::string_view> cells;
            std::size_t start = 0;
            for (;;)
            {
                const auto comma = line.find(',', start);
                cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
                if (comma == std::string_view::npos)
                    return cells;
                start = comma + 1;
            }
        }

        bool iequals(std::string_view a, std::string_view b)
        {
            if (a.size() != b.size())
                return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
                    return false;
            return true;
        }

        template <typename T>
        bool parse_number(std::string_view s, T &out)
        {
            const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
            return ec == std::errc{} && end == s.data() + s.size();
        }

        std::chrono::year_month_day parse_date(std::string_view s, std::size_t row)
        {
            int y = 0;
            unsigned m = 0;
            unsigned d = 0;
            if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_number(s.substr(0, 4), y) ||
                !parse_number(s.substr(5, 2), m) || !parse_number(s.substr(8, 2), d))
                throw ParseError("expected an ISO-8601 date YYYY-MM-DD, got '" + std::string(s) + "'", row, 1);
            const std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
            if (!date.ok())
                throw ParseError("invalid calendar date '" + std::string(s) + "'", row, 1);
            return date;
        }

        std::string format_date(std::chrono::year_month_day d)
        {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                          static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
            return buf;
        }
    }

    PriceTable parse_prices_csv(std::string_view text)
    {
        if (text.starts_with("\xEF\xBB\xBF"))
            text.remove_prefix(3);

        std::vector<std::string_view> lines;
        std::size_t start = 0;
        while (start < text.size())
        {
            const auto nl = text.find('\n', start);
            lines.push_back(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
            start = nl == std::string_view::npos ? text.size() : nl + 1;
        }
        while (!lines.empty() && trim(lines.back()).empty())
            lines.pop_back();
        if (lines.empty())
            throw ParseError("empty price file");

        const auto header = split(lines.front());
        if (!iequals(header.front(), "date"))
            throw ParseError("first header cell must be 'Date'", 1, 1);
        if (header.size() < 2)
            throw ParseError("no ticker columns", 1);

        PriceTable table;
        for (std::size_t c = 1; c < header.size(); ++c)
        {
            if (header[c].empty())
                throw ParseError("empty ticker name", 1, c + 1);
            table.labels.emplace_back(header[c]);
        }

        const std::size_t n = table.labels.size();
        const std::size_t rows = lines.size() - 1;
        table.prices.resize(static_cast<Index>(rows), static_cast<Index>(n));
        for (std::size_t r = 0; r < rows; ++r)
        {
            const std::size_t file_row = r + 2;
            const auto cells = split(lines[r + 1]);
            if (cells.size() != n + 1)
                throw ParseError("expected " + std::to_string(n + 1) + " cells, found " + std::to_string(cells.size()),
                                 file_row, cells.size() < n + 1 ? cells.size() + 1 : n + 2);
            const auto date = parse_date(cells[0], file_row);
            if (!table.dates.empty() && !(table.dates.back() < date))
                throw OrderingError("row " + std::to_string(file_row) + ": date " + format_date(date) +
                                    " does not follow " + format_date(table.dates.back()));
            table.dates.push_back(date);
            for (std::size_t c = 0; c < n; ++c)
            {
                const std::string_view cell = cells[c + 1];
                if (cell.empty())
                    throw ParseError("missing price for " + table.labels[c], file_row, c + 2);
                double v = 0.0;
                if (!parse_number(cell, v) || !std::isfinite(v))
                    throw ParseError("not a number: '" + std::string(cell) + "'", file_row, c + 2);
                if (!(v > 0.0))
                    throw DomainError("row " + std::to_string(file_row) + ", column " + std::to_string(c + 2) +
                                      ": price must be positive, got " + std::string(cell));
                table.prices(static_cast<Index>(r), static_cast<Index>(c)) = v;
            }
        }
        return table;
    }

    PriceTable load_prices_csv(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ParseError("cannot open " + path.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return parse_prices_csv(buffer.str());
    }

    void write_prices_csv(const PriceTable &table, const std::filesystem::path &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw ParseError("cannot write " + path.string());
        out << "Date";
        for (const auto &label : table.labels)
            out << ',' << label;
        out << '\n';
        char buf[32];
        for (Index r = 0; r < table.prices.rows(); ++r)
        {
            out << format_date(table.dates[static_cast<std::size_t>(r)]);
            for (Index c = 0; c < table.prices.cols(); ++c)
            {
                std::snprintf(buf, sizeof buf, "%.17g", table.prices(r, c));
                out << ',' << buf;
            }
            out << '\n';
        }
    }

    ReturnMatrix prices_to_returns(const PriceTable &table)
    {
        const Index t = table.prices.rows();
        if (t < 2)
            throw InsufficientDataError("need at least two price rows");
        ReturnMatrix r;
        r.labels = table.labels;
        r.values = (table.prices.bottomRows(t - 1) - table.prices.topRows(t - 1)).cwiseQuotient(table.prices.topRows(t - 1));
        return r;
    }

    PriceTable returns_to_prices(const ReturnMatrix &returns, double initial, std::chrono::year_month_day start)
    {
        const Index t = returns.periods();
        PriceTable table;
        table.labels = returns.labels;
        table.prices.resize(t + 1, returns.assets());
        table.prices.row(0).setConstant(initial);
        for (Index r = 0; r < t; ++r)
            table.prices.row(r + 1) = table.prices.row(r).cwiseProduct((1.0 + returns.values.row(r).array()).matrix());
        const std::chrono::sys_days day0{start};
        for (Index r = 0; r <= t; ++r)
            table.dates.emplace_back(day0 + std::chrono::days{r});
        return table;
    }

    RunReport run_backtest(const PriceTable &table, const ScenarioConfig &cfg, const Method &method)
    {
        validate_backtest(cfg);
        return run_single(cfg, method, prices_to_returns(table), 0);
    }

    SweepReport run_backtest_sweep(const PriceTable &table, const ScenarioConfig &cfg)
    {
        validate_backtest(cfg);
        std::vector<RunReport> runs = run_methods(cfg, cfg.methods, prices_to_returns(table), 0);
        SweepReport sweep;
        for (std::size_t m = 0; m < runs.size(); ++m)
            sweep.methods.push_back(summarize(runs[m].method, 1, {runs[m]}, {}));
        apply_improvement(sweep);
        return sweep;
    }
}
