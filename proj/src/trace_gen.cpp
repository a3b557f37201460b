#include "plab/trace_gen.hpp"

#include "plab/error.hpp"
#include "plab/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace plab
{
    namespace
    {
        using Engine = std::mt19937_64;

        void require(bool ok, const char *field, const std::string &message)
        {
            if (!ok)
                throw ConfigError(field, message);
        }

        void require_length(Index length, Index minimum = 2)
        {
            if (length < minimum)
                throw ConfigError("sim_length", "trace length must be at least " + std::to_string(minimum) +
                                                    ", got " + std::to_string(length));
        }

        void validate_common(Index num_independent, Index num_dependent, double noise_std_ratio)
        {
            require(num_independent >= 1, "num_independent", "must be >= 1");
            require(num_dependent >= 0, "num_dependent", "must be >= 0");
            require(noise_std_ratio > 0.0, "noise_std_ratio", "must be > 0");
        }

        double sample_std(const Eigen::Ref<const Eigen::VectorXd> &x)
        {
            if (x.size() < 2)
                return 0.0;
            const double mean = x.mean();
            return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
        }

        // Fills columns [num_independent, end) as noisy copies of random
        // independent columns. A negative base_std means "use the parent's
        // sample std".
        void add_dependents(Trace &trace, Index num_independent, double noise_std_ratio,
                            double base_std, std::uint64_t seed)
        {
            Engine engine(derive_seed(seed, 1));
            std::uniform_int_distribution<Index> pick(0, num_independent - 1);
            std::normal_distribution<double> unit(0.0, 1.0);

            auto &values = trace.returns.values;
            for (Index j = num_independent; j < values.cols(); ++j)
            {
                const Index parent = pick(engine);
                trace.parent[static_cast<std::size_t>(j)] = parent;
                const double scale = base_std >= 0.0 ? base_std : sample_std(values.col(parent));
                const double noise_std = noise_std_ratio * scale;
                for (Index t = 0; t < values.rows(); ++t)
                    values(t, j) = values(t, parent) + noise_std * unit(engine);
            }
        }

        Trace make_trace(Index length, Index columns)
        {
            Trace trace;
            trace.returns.values = Eigen::MatrixXd::Zero(length, columns);
            trace.returns.labels = default_labels(columns);
            trace.parent.assign(static_cast<std::size_t>(columns), -1);
            return trace;
        }

        double gamma_sign(double x)
        {
            if (x > 0.0)
                return 1.0;
            return static_cast<long long>(std::floor(x)) % 2 == 0 ? 1.0 : -1.0;
        }

        bool nonpositive_integer(double x)
        {
            return x <= 0.0 && std::floor(x) == x;
        }
    }

    void validate(const GaussianConfig &cfg)
    {
        validate_common(cfg.num_independent, cfg.num_dependent, cfg.noise_std_ratio);
        require(cfg.base_std > 0.0, "base_std", "must be > 0");
        require(std::isfinite(cfg.base_mean), "base_mean", "must be finite");
    }

    void validate(const GbmConfig &cfg)
    {
        validate_common(cfg.num_independent, cfg.num_dependent, cfg.noise_std_ratio);
        require(cfg.volatility >= 0.0, "volatility", "must be >= 0");
        require(cfg.dt > 0.0, "dt", "must be > 0");
        require(cfg.initial_value != 0.0, "initial_value", "must be non-zero");
        require(std::isfinite(cfg.drift), "drift", "must be finite");
    }

    void validate(const GarchConfig &cfg)
    {
        validate_common(cfg.num_independent, cfg.num_dependent, cfg.noise_std_ratio);
        require(cfg.alpha0 > 0.0, "alpha0", "must be > 0");
        require(cfg.alpha1 >= 0.0, "alpha1", "must be >= 0");
        require(cfg.beta1 >= 0.0, "beta1", "must be >= 0");
        require(cfg.alpha1 + cfg.beta1 < 1.0, "alpha1+beta1",
                "unstable model: alpha1 + beta1 must be < 1");
        require(cfg.burn_in >= 0, "burn_in", "must be >= 0");
    }

    void validate(const ArfimaConfig &cfg)
    {
        require(cfg.num_pairs >= 1, "num_pairs", "must be >= 1");
        require(cfg.num_dependent >= 0, "num_dependent", "must be >= 0");
        require(cfg.noise_std_ratio > 0.0, "noise_std_ratio", "must be > 0");
        require(cfg.coupling_weight >= 0.5 && cfg.coupling_weight <= 1.0, "coupling_weight",
                "must lie in [0.5, 1]");
        require(std::abs(cfg.rho1) <= 0.5, "rho1", "must lie in [-0.5, 0.5]");
        require(std::abs(cfg.rho2) <= 0.5, "rho2", "must lie in [-0.5, 0.5]");
        require(cfg.rho1 != 0.0, "rho1", "Gamma(-rho) is singular at rho = 0");
        require(cfg.rho2 != 0.0, "rho2", "Gamma(-rho) is singular at rho = 0");
        require(cfg.kernel_truncation >= 1, "kernel_truncation", "must be >= 1");
        require(cfg.return_scale > 0.0, "return_scale", "must be > 0");
    }

    void validate(const ShockConfig &cfg)
    {
        require(cfg.max_shocks >= 1, "max_shocks", "must be >= 1");
        require(cfg.mixing_beta > 0.0 && cfg.mixing_beta <= 1.0, "mixing_beta", "must lie in (0, 1]");
        require(cfg.max_duration_fraction > 0.0 && cfg.max_duration_fraction <= 1.0,
                "max_duration_fraction", "must lie in (0, 1]");
        require(cfg.num_mixed_pairs >= 0, "num_mixed_pairs", "must be >= 0");
    }

    void validate(const GeneratorConfig &cfg)
    {
        std::visit(
            [](const auto &c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ArfimaShockConfig>)
                {
                    validate(c.arfima);
                    validate(c.shocks);
                    const Index n = 2 * c.arfima.num_pairs + c.arfima.num_dependent;
                    const Index pairs = c.shocks.num_mixed_pairs == 0 ? n / 8 : c.shocks.num_mixed_pairs;
                    require(2 * pairs <= n, "num_mixed_pairs", "needs two distinct assets per pair");
                }
                else
                    validate(c);
            },
            cfg);
    }

    Index column_count(const GeneratorConfig &cfg)
    {
        return std::visit(
            [](const auto &c) -> Index {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ArfimaConfig>)
                    return 2 * c.num_pairs + c.num_dependent;
                else if constexpr (std::is_same_v<T, ArfimaShockConfig>)
                    return 2 * c.arfima.num_pairs + c.arfima.num_dependent;
                else
                    return c.num_independent + c.num_dependent;
            },
            cfg);
    }

    std::string_view generator_name(const GeneratorConfig &cfg)
    {
        constexpr std::string_view names[] = {"gaussian", "gbm", "garch", "arfima", "arfima_shocks"};
        return names[cfg.index()];
    }

    Trace gen_gaussian(const GaussianConfig &cfg, Index length, std::uint64_t seed)
    {
        validate(cfg);
        require_length(length);
        Trace trace = make_trace(length, cfg.num_independent + cfg.num_dependent);

        Engine engine(derive_seed(seed, 0));
        std::normal_distribution<double> normal(cfg.base_mean, cfg.base_std);
        for (Index j = 0; j < cfg.num_independent; ++j)
            for (Index t = 0; t < length; ++t)
                trace.returns.values(t, j) = normal(engine);

        add_dependents(trace, cfg.num_independent, cfg.noise_std_ratio, cfg.base_std, seed);
        return trace;
    }

    Trace gen_gbm(const GbmConfig &cfg, Index length, std::uint64_t seed)
    {
        validate(cfg);
        require_length(length);
        Trace trace = make_trace(length, cfg.num_independent + cfg.num_dependent);

        Engine engine(derive_seed(seed, 0));
        std::normal_distribution<double> unit(0.0, 1.0);
        const double drift = cfg.drift - 0.5 * cfg.volatility * cfg.volatility;
        const double step_std = std::sqrt(cfg.dt);
        for (Index j = 0; j < cfg.num_independent; ++j)
        {
            double wiener = 0.0;
            for (Index k = 0; k < length; ++k)
            {
                if (k > 0)
                    wiener += step_std * unit(engine);
                const double time = static_cast<double>(k) * cfg.dt;
                trace.returns.values(k, j) = cfg.initial_value * std::exp(drift * time + cfg.volatility * wiener);
            }
        }

        add_dependents(trace, cfg.num_independent, cfg.noise_std_ratio, -1.0, seed);
        return trace;
    }

    GarchPath garch_path(const GarchConfig &cfg, Index length, std::uint64_t seed)
    {
        validate(cfg);
        require_length(length, 1);
        Engine engine(seed);
        std::normal_distribution<double> unit(0.0, 1.0);

        GarchPath path;
        path.returns.reserve(static_cast<std::size_t>(length));
        path.variances.reserve(static_cast<std::size_t>(length));

        const double unconditional = cfg.alpha0 / (1.0 - cfg.alpha1 - cfg.beta1);
        double variance = unconditional;
        double shock_sq = unconditional;
        for (Index t = 0; t < cfg.burn_in + length; ++t)
        {
            variance = cfg.alpha0 + cfg.alpha1 * shock_sq + cfg.beta1 * variance;
            const double shock = std::sqrt(variance) * unit(engine);
            shock_sq = shock * shock;
            if (t >= cfg.burn_in)
            {
                path.returns.push_back(shock);
                path.variances.push_back(variance);
            }
        }
        return path;
    }

    Trace gen_garch(const GarchConfig &cfg, Index length, std::uint64_t seed)
    {
        validate(cfg);
        require_length(length);
        Trace trace = make_trace(length, cfg.num_independent + cfg.num_dependent);
        for (Index j = 0; j < cfg.num_independent; ++j)
        {
            const GarchPath path = garch_path(cfg, length, derive_seed(seed, 0, static_cast<std::uint64_t>(j)));
            trace.returns.values.col(j) = Eigen::Map<const Eigen::VectorXd>(path.returns.data(), length);
        }
        add_dependents(trace, cfg.num_independent, cfg.noise_std_ratio, -1.0, seed);
        return trace;
    }

    double arfima_weight(Index n, double rho, ArfimaKernel kernel)
    {
        if (n < 1)
            throw ConfigError("kernel_index", "a_n is defined for n >= 1");
        const double num_arg = static_cast<double>(n) - rho;
        if (nonpositive_integer(-rho) || nonpositive_integer(num_arg))
            throw ConfigError("rho", "gamma function evaluated at a non-positive integer (rho = " +
                                         std::to_string(rho) + ")");
        const double log_magnitude =
            std::lgamma(num_arg) - std::lgamma(-rho) - std::lgamma(1.0 + static_cast<double>(n));
        const double sign = gamma_sign(num_arg) * gamma_sign(-rho);
        const double value = sign * std::exp(log_magnitude);
        return kernel == ArfimaKernel::as_written ? value : -value;
    }

    std::vector<double> arfima_kernel(double rho, Index count, ArfimaKernel kernel)
    {
        std::vector<double> weights;
        weights.reserve(static_cast<std::size_t>(count));
        for (Index n = 1; n <= count; ++n)
            weights.push_back(arfima_weight(n, rho, kernel));
        return weights;
    }

    Trace gen_arfima(const ArfimaConfig &cfg, Index length, std::uint64_t seed)
    {
        validate(cfg);
        require_length(length);
        if (cfg.kernel_truncation > length)
            throw ConfigError("kernel_truncation", "must not exceed the trace length");

        const Index independent = 2 * cfg.num_pairs;
        Trace trace = make_trace(length, independent + cfg.num_dependent);
        const std::vector<double> a1 = arfima_kernel(cfg.rho1, cfg.kernel_truncation, cfg.kernel);
        const std::vector<double> a2 = arfima_kernel(cfg.rho2, cfg.kernel_truncation, cfg.kernel);
        const double w = cfg.coupling_weight;

        Engine engine(derive_seed(seed, 0));
        std::normal_distribution<double> unit(0.0, 1.0);
        std::vector<double> x(static_cast<std::size_t>(length));
        std::vector<double> y(static_cast<std::size_t>(length));
        for (Index p = 0; p < cfg.num_pairs; ++p)
        {
            for (Index i = 0; i < length; ++i)
            {
                const Index lags = std::min(i, cfg.kernel_truncation);
                double own1 = 0.0;
                double own2 = 0.0;
                for (Index n = 1; n <= lags; ++n)
                {
                    own1 += a1[static_cast<std::size_t>(n - 1)] * x[static_cast<std::size_t>(i - n)];
                    own2 += a2[static_cast<std::size_t>(n - 1)] * y[static_cast<std::size_t>(i - n)];
                }
                const double e1 = unit(engine);
                const double e2 = unit(engine);
                x[static_cast<std::size_t>(i)] = w * own1 + (1.0 - w) * own2 + e1;
                y[static_cast<std::size_t>(i)] = (1.0 - w) * own1 + w * own2 + e2;
            }
            trace.returns.values.col(2 * p) = cfg.return_scale * Eigen::Map<const Eigen::VectorXd>(x.data(), length);
            trace.returns.values.col(2 * p + 1) = cfg.return_scale * Eigen::Map<const Eigen::VectorXd>(y.data(), length);
        }

        add_dependents(trace, independent, cfg.noise_std_ratio, -1.0, seed);
        return trace;
    }

    ReturnMatrix apply_correlation_mixing(const ReturnMatrix &returns, std::span<const MixingPair> pairs,
                                          double beta)
    {
        if (!(beta > 0.0 && beta <= 1.0))
            throw ConfigError("mixing_beta", "must lie in (0, 1]");
        const Index periods = returns.periods();
        const Index assets = returns.assets();

        // Rows claimed per asset; an asset may appear in several pairs only on disjoint intervals.
        std::vector<std::vector<std::pair<Index, Index>>> claimed(static_cast<std::size_t>(assets));
        for (const MixingPair &p : pairs)
        {
            if (p.a < 0 || p.a >= assets || p.b < 0 || p.b >= assets || p.a == p.b)
                throw ConfigError("mixing_pairs", "pair must reference two distinct valid assets");
            if (p.begin < 0 || p.end > periods || p.begin >= p.end)
                throw ConfigError("mixing_pairs", "interval must be a non-empty range within [0, T)");
            for (Index asset : {p.a, p.b})
            {
                auto &spans = claimed[static_cast<std::size_t>(asset)];
                for (const auto &[b, e] : spans)
                    if (p.begin < e && b < p.end)
                        throw ConfigError("mixing_pairs", "overlapping intervals on asset " +
                                                              returns.labels[static_cast<std::size_t>(asset)]);
                spans.emplace_back(p.begin, p.end);
            }
        }

        ReturnMatrix mixed = returns;
        for (const MixingPair &p : pairs)
            for (Index t = p.begin; t < p.end; ++t)
            {
                const double ra = returns.values(t, p.a);
                const double rb = returns.values(t, p.b);
                mixed.values(t, p.a) = beta * ra + (1.0 - beta) * rb;
                mixed.values(t, p.b) = beta * rb + (1.0 - beta) * ra;
            }
        return mixed;
    }

    std::vector<MixingPair> draw_mixing_pairs(Index assets, Index periods, Index count, std::uint64_t seed)
    {
        if (2 * count > assets)
            throw ConfigError("num_mixed_pairs", "needs two distinct assets per pair");
        if (count == 0)
            return {};
        Engine engine(seed);
        std::vector<Index> order(static_cast<std::size_t>(assets));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), engine);

        const Index shortest = std::max<Index>(1, periods / 20);
        const Index longest = std::max(shortest, std::min(periods, periods / 5));
        std::uniform_int_distribution<Index> span_length(shortest, longest);

        std::vector<MixingPair> pairs;
        for (Index k = 0; k < count; ++k)
        {
            const Index len = span_length(engine);
            std::uniform_int_distribution<Index> start(0, periods - len);
            const Index begin = start(engine);
            pairs.push_back({order[static_cast<std::size_t>(2 * k)], order[static_cast<std::size_t>(2 * k + 1)],
                             begin, begin + len});
        }
        return pairs;
    }

    ShockResult apply_shocks(const ReturnMatrix &returns, const ShockConfig &cfg, std::uint64_t seed)
    {
        validate(cfg);
        const Index periods = returns.periods();
        if (periods < 10)
            throw InsufficientDataError("shocks need a trace of at least 10 periods");

        Engine engine(seed);
        std::uniform_int_distribution<Index> shock_count(1, cfg.max_shocks);
        std::uniform_int_distribution<Index> pick_asset(0, returns.assets() - 1);
        std::uniform_int_distribution<Index> pick_start(0, periods - 1);
        const Index max_duration =
            std::max<Index>(1, static_cast<Index>(std::floor(static_cast<double>(periods) * cfg.max_duration_fraction)));
        std::uniform_int_distribution<Index> pick_duration(1, max_duration);
        std::uniform_real_distribution<double> amplitude(0.0, 1.0);

        const Eigen::RowVectorXd max_returns = returns.values.colwise().maxCoeff();

        ShockResult result{returns, {}};
        const Index count = shock_count(engine);
        for (Index s = 0; s < count; ++s)
        {
            ShockEvent event;
            event.asset = pick_asset(engine);
            event.begin = pick_start(engine);
            const Index duration = pick_duration(engine);
            event.end = std::min(periods, event.begin + duration + 1);
            event.amplitude = amplitude(engine);
            event.max_return = max_returns(event.asset);

            const double bound = std::abs(event.max_return);
            std::uniform_real_distribution<double> noise(-bound, bound);
            for (Index t = event.begin; t < event.end; ++t)
            {
                const double draw = bound > 0.0 ? noise(engine) : 0.0;
                result.returns.values(t, event.asset) += event.amplitude * draw;
            }
            result.events.push_back(event);
        }
        return result;
    }

    Trace gen_arfima_shocks(const ArfimaShockConfig &cfg, Index length, std::uint64_t seed)
    {
        validate(GeneratorConfig{cfg});
        Trace trace = gen_arfima(cfg.arfima, length, seed);
        const Index assets = trace.returns.assets();
        const Index pair_count = cfg.shocks.num_mixed_pairs == 0 ? assets / 8 : cfg.shocks.num_mixed_pairs;
        const std::vector<MixingPair> pairs = draw_mixing_pairs(assets, length, pair_count, derive_seed(seed, 2));
        trace.returns = apply_correlation_mixing(trace.returns, pairs, cfg.shocks.mixing_beta);
        trace.returns = apply_shocks(trace.returns, cfg.shocks, derive_seed(seed, 3)).returns;
        return trace;
    }

    Trace generate(const GeneratorConfig &cfg, Index length, std::uint64_t seed)
    {
        return std::visit(
            [&](const auto &c) -> Trace {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, GaussianConfig>)
                    return gen_gaussian(c, length, seed);
                else if constexpr (std::is_same_v<T, GbmConfig>)
                    return gen_gbm(c, length, seed);
                else if constexpr (std::is_same_v<T, GarchConfig>)
                    return gen_garch(c, length, seed);
                else if constexpr (std::is_same_v<T, ArfimaConfig>)
                    return gen_arfima(c, length, seed);
                else
                    return gen_arfima_shocks(c, length, seed);
            },
            cfg);
    }
}
