#pragma once

#include "plab/harness.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace plab
{
    // Scenario files are sectioned key = value text:
    //
    //   [scenario]   num_iters, sim_length, delta_t, num_assets, master_seed,
    //                var_alpha, risk_free, box_length, netmod_alpha, methods,
    //                cov_lookback, detrended_lookback, dpcca_ridge
    //   [generator]  kind = gaussian | gbm | garch | arfima | arfima_shocks
    //   [gaussian] [gbm] [garch] [arfima] [shocks]   per-model parameters
    //   [cla]        lower_bound, upper_bound, target_return
    //
    // Missing keys take their defaults. When num_assets is given but a
    // model's column counts are not, the counts are derived from it.

    /// Parses, applies "section.key=value" overrides, and validates.
    /// Throws ConfigError naming the key; UsageError for a malformed override or
    /// an unknown method, scheme, metric or lookback name.
    ScenarioConfig parse_config(std::string_view text, const std::vector<std::string> &overrides = {});
    ScenarioConfig load_config(const std::filesystem::path &path, const std::vector<std::string> &overrides = {});

    /// Like parse_config, but skips the generator-dependent checks.
    ScenarioConfig parse_backtest_config(std::string_view text, const std::vector<std::string> &overrides = {});

    /// Canonical text of a resolved config: every key, fixed order, shortest
    /// round-trip numbers. Parsing the echo yields the same config.
    std::string echo_config(const ScenarioConfig &cfg);
}
