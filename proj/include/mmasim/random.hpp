// SPDX-License-Identifier: Apache-2.0
//! \file random.hpp
//! Counter-based random streams for reproducible Monte Carlo ensembles.
//!
//! Every replica of an ensemble owns the stream keyed by the master seed and
//! indexed by its replica number, so replica i draws the same variates no
//! matter how replicas are scheduled over threads.
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mmasim {

//! Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key)
    {
        for (int round = 0; round < 10; ++round)
        {
            if (round > 0)
            {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            std::uint64_t const p0 = std::uint64_t{kMul0} * ctr[0];
            std::uint64_t const p1 = std::uint64_t{kMul1} * ctr[2];
            auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto const lo0 = static_cast<std::uint32_t>(p0);
            auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto const lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

//! 64-bit uniform random bit generator over one (seed, stream) Philox sequence.
class RandomStream
{
  public:
    using result_type = std::uint64_t;

    RandomStream() : RandomStream(0, 0) {}

    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
        , stream_(stream)
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (used_ == 2)
            refill();
        auto const i = 2 * used_++;
        return (std::uint64_t{block_[i]} << 32) | block_[i + 1];
    }

    //! Uniform on [0, 1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    //! Uniform on the open interval (0, 1); safe as an argument to log or pow.
    double uniform_open()
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t seed() const
    {
        return std::uint64_t{key_[0]} | (std::uint64_t{key_[1]} << 32);
    }
    std::uint64_t stream() const { return stream_; }

  private:
    void refill()
    {
        Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_index_),
                                static_cast<std::uint32_t>(block_index_ >> 32),
                                static_cast<std::uint32_t>(stream_),
                                static_cast<std::uint32_t>(stream_ >> 32)};
        block_ = Philox4x32::generate(ctr, key_);
        ++block_index_;
        used_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Philox4x32::Counter block_{};
    int used_ = 2;
};

//! Stream for replica \c index of an ensemble with master seed \c seed.
inline RandomStream replica_stream(std::uint64_t seed, std::uint64_t index)
{
    return RandomStream(seed, index);
}

}  // namespace mmasim
