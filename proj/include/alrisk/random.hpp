#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace alrisk {

//! splitmix64 finalizer; decorrelates structured seed inputs.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

//! Combines up to three seed components into one stream seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0)
{
    return mix64(mix64(mix64(a) ^ b) ^ c);
}

//! Deterministic random source.
//!
//! All draw algorithms are implemented by hand on top of the mt19937_64
//! stream so that results are identical across standard libraries; the
//! distribution adapters in `<random>` are implementation-defined.
class Rng
{
public:
    explicit Rng(std::uint64_t seed)
        : gen_(seed)
    {
    }

    std::uint64_t next_u64() { return gen_(); }

    //! Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    //! Uniform integer in [0, n); unbiased via rejection.
    std::size_t uniform_below(std::size_t n)
    {
        if (n == 0)
            throw std::invalid_argument("Rng::uniform_below: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = (UINT64_MAX / un) * un;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::size_t>(x % un);
    }

    bool bernoulli(double p) { return uniform() < p; }

    //! In-place Fisher-Yates shuffle.
    template<typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[uniform_below(i)]);
    }

    //! k distinct elements of `pool`, each subset equally likely.
    //! Returned in draw order (partial Fisher-Yates on a copy).
    std::vector<int> sample_without_replacement(const std::vector<int>& pool, int k)
    {
        if (k < 0 || static_cast<std::size_t>(k) > pool.size())
            throw std::invalid_argument("Rng::sample_without_replacement: bad k");
        std::vector<int> tmp = pool;
        std::vector<int> out;
        out.reserve(k);
        std::size_t n = tmp.size();
        for (int t = 0; t < k; ++t) {
            const std::size_t j = uniform_below(n);
            out.push_back(tmp[j]);
            tmp[j] = tmp[n - 1];
            --n;
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace alrisk
