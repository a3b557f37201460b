#pragma once

#include <cstdint>

namespace plab
{
    /// SplitMix64 finalizer: a bijective mixer of 64-bit values.
    constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Seed of stream `index` under `master`: splitmix64(splitmix64(master) ^ index).
    /// The master is mixed first so that nearby masters do not share run
    /// seeds (a bare master ^ index only permutes small index ranges).
    /// Independent of evaluation order, so runs can be scheduled freely.
    constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
    {
        return splitmix64(splitmix64(master) ^ index);
    }

    /// A second-level stream (e.g. per rebalance window inside a run).
    constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                        std::uint64_t sub) noexcept
    {
        return splitmix64(derive_seed(master, index) ^ splitmix64(sub + 0x5851f42d4c957f2dULL));
    }
}
