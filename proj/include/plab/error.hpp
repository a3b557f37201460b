#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plab
{
    /// Base of every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;

        /// Short machine-readable category ("config", "degenerate", ...).
        virtual const char *kind() const noexcept { return "error"; }
    };

    /// A configuration field violates its invariant. `field()` names the key.
    class ConfigError : public Error
    {
    public:
        ConfigError(std::string field, const std::string &message)
            : Error(field + ": " + message), field_(std::move(field)) {}

        const std::string &field() const noexcept { return field_; }
        const char *kind() const noexcept override { return "config"; }

    private:
        std::string field_;
    };

    class InsufficientDataError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "insufficient_data"; }
    };

    /// Zero-variance asset or series; `asset()` carries its label when known.
    class DegenerateError : public Error
    {
    public:
        explicit DegenerateError(const std::string &message, std::string asset = {})
            : Error(asset.empty() ? message : message + " (asset " + asset + ")"),
              asset_(std::move(asset)) {}

        const std::string &asset() const noexcept { return asset_; }
        const char *kind() const noexcept override { return "degenerate"; }

    private:
        std::string asset_;
    };

    class SingularityError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "singular"; }
    };

    class InfeasibleError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "infeasible"; }
    };

    class DomainError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "domain"; }
    };

    /// A quantity that is mathematically undefined for the given input
    /// (modularity of an empty graph, NHHI with one asset, ...).
    class UndefinedError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "undefined"; }
    };

    class DimensionError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "dimension"; }
    };

    /// Malformed input file. Row and column are 1-based; 0 means unknown.
    class ParseError : public Error
    {
    public:
        ParseError(const std::string &message, std::size_t row = 0, std::size_t column = 0)
            : Error(format(message, row, column)), row_(row), column_(column) {}

        std::size_t row() const noexcept { return row_; }
        std::size_t column() const noexcept { return column_; }
        const char *kind() const noexcept override { return "parse"; }

    private:
        static std::string format(const std::string &message, std::size_t row, std::size_t column)
        {
            if (row == 0)
                return message;
            std::string where = "row " + std::to_string(row);
            if (column != 0)
                where += ", column " + std::to_string(column);
            return where + ": " + message;
        }

        std::size_t row_;
        std::size_t column_;
    };

    class OrderingError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "ordering"; }
    };

    /// Bad command line or unknown identifier (scheme, metric, flag).
    class UsageError : public Error
    {
    public:
        using Error::Error;
        const char *kind() const noexcept override { return "usage"; }
    };
}
