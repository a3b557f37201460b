#pragma once

#include "plab/types.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace plab
{
    // Synthetic return traces. Every generator is a pure function of
    // (config, length, seed): same inputs, bitwise-identical output.
    //
    // Independent columns come first, dependent columns after them. A
    // dependent column copies a uniformly chosen independent column and
    // adds Normal(0, noise_std_ratio * scale) noise, where scale is
    // base_std for the Gaussian model and the parent's sample standard
    // deviation for the other models.

    struct GaussianConfig
    {
        Index num_independent = 16;
        Index num_dependent = 16;
        double base_mean = 0.0;
        double base_std = 0.01;
        double noise_std_ratio = 0.25;
    };

    /// Geometric Brownian motion sampled from its exact solution
    /// r_t = r0 * exp((mu - sigma^2/2) t + sigma W_t) at t = k * dt.
    struct GbmConfig
    {
        Index num_independent = 16;
        Index num_dependent = 16;
        double drift = 0.0;
        double volatility = 0.2;
        double initial_value = 0.001;
        double dt = 1.0;
        double noise_std_ratio = 0.25;
    };

    struct GarchConfig
    {
        Index num_independent = 16;
        Index num_dependent = 16;
        double alpha0 = 1e-5;
        double alpha1 = 0.1;
        double beta1 = 0.85;
        double noise_std_ratio = 0.25;
        Index burn_in = 200;
    };

    /// Sign convention of the fractional kernel a_n(rho).
    enum class ArfimaKernel
    {
        /// Gamma(n - rho) / (Gamma(-rho) Gamma(1 + n)).
        as_written,
        /// rho Gamma(n - rho) / (Gamma(1 - rho) Gamma(1 + n)), i.e. the negation of the above.
        literature
    };

    struct ArfimaConfig
    {
        Index num_pairs = 8;
        Index num_dependent = 16;
        double coupling_weight = 0.5;
        double rho1 = 0.4;
        double rho2 = 0.4;
        Index kernel_truncation = 100;
        double noise_std_ratio = 0.25;
        ArfimaKernel kernel = ArfimaKernel::as_written;
        /// Multiplies the pair series; the recursion is linear, so this is the
        /// innovation standard deviation. 1 reproduces unit-variance noise.
        double return_scale = 0.01;
    };

    struct ShockConfig
    {
        Index max_shocks = 5;
        double mixing_beta = 0.5;
        double max_duration_fraction = 0.1;
        /// Number of asset pairs mixed over a random interval; 0 means N / 8.
        Index num_mixed_pairs = 0;
    };

    struct ArfimaShockConfig
    {
        ArfimaConfig arfima;
        ShockConfig shocks;
    };

    using GeneratorConfig =
        std::variant<GaussianConfig, GbmConfig, GarchConfig, ArfimaConfig, ArfimaShockConfig>;

    /// A generated trace with the provenance of its dependent columns.
    struct Trace
    {
        ReturnMatrix returns;
        /// parent[j] is the independent column copied by column j, or -1.
        std::vector<Index> parent;
    };

    // Config validation: throws ConfigError naming the offending field.
    void validate(const GaussianConfig &cfg);
    void validate(const GbmConfig &cfg);
    void validate(const GarchConfig &cfg);
    void validate(const ArfimaConfig &cfg);
    void validate(const ShockConfig &cfg);
    void validate(const GeneratorConfig &cfg);

    /// Number of columns the generator emits.
    Index column_count(const GeneratorConfig &cfg);
    std::string_view generator_name(const GeneratorConfig &cfg);

    Trace gen_gaussian(const GaussianConfig &cfg, Index length, std::uint64_t seed);
    Trace gen_gbm(const GbmConfig &cfg, Index length, std::uint64_t seed);
    Trace gen_garch(const GarchConfig &cfg, Index length, std::uint64_t seed);
    Trace gen_arfima(const ArfimaConfig &cfg, Index length, std::uint64_t seed);
    /// ARFIMA pairs, then correlation mixing on random intervals, then shocks.
    Trace gen_arfima_shocks(const ArfimaShockConfig &cfg, Index length, std::uint64_t seed);

    Trace generate(const GeneratorConfig &cfg, Index length, std::uint64_t seed);

    /// One GARCH(1,1) path after burn-in, with its conditional variances.
    struct GarchPath
    {
        std::vector<double> returns;
        std::vector<double> variances;
    };
    GarchPath garch_path(const GarchConfig &cfg, Index length, std::uint64_t seed);

    /// Fractional weight a_n(rho) for n >= 1, evaluated through log-gamma.
    /// Throws ConfigError when rho makes a gamma argument a non-positive integer.
    double arfima_weight(Index n, double rho, ArfimaKernel kernel = ArfimaKernel::as_written);
    /// a_1 .. a_count.
    std::vector<double> arfima_kernel(double rho, Index count,
                                      ArfimaKernel kernel = ArfimaKernel::as_written);

    /// Mix assets a and b on rows [begin, end).
    struct MixingPair
    {
        Index a = 0;
        Index b = 0;
        Index begin = 0;
        Index end = 0;
    };

    /// r_a <- beta r_a + (1 - beta) r_b and r_b <- beta r_b + (1 - beta) r_a,
    /// both from pre-update values, inside each pair's interval only.
    ReturnMatrix apply_correlation_mixing(const ReturnMatrix &returns,
                                          std::span<const MixingPair> pairs, double beta);

    /// `count` pairs over disjoint assets, each with one interval whose
    /// length is uniform in [T/20, T/5].
    std::vector<MixingPair> draw_mixing_pairs(Index assets, Index periods, Index count,
                                              std::uint64_t seed);

    struct ShockEvent
    {
        Index asset = 0;
        Index begin = 0;
        /// One past the last shocked row.
        Index end = 0;
        double amplitude = 0.0;
        double max_return = 0.0;
    };

    struct ShockResult
    {
        ReturnMatrix returns;
        std::vector<ShockEvent> events;
    };

    /// Adds a uniform number of shocks in [1, max_shocks]. Each shock picks an
    /// asset, a start row, a duration d in [1, floor(T * max_duration_fraction)]
    /// and an amplitude alpha in [0, 1), then adds alpha * U(-r_max, r_max) to
    /// rows start..start+d, where r_max is the asset's largest return before
    /// any shock.
    ShockResult apply_shocks(const ReturnMatrix &returns, const ShockConfig &cfg, std::uint64_t seed);
}
