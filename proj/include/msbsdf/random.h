// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace msbsdf {

/// Replayable uniform random stream (PCG32, XSH-RR output). A stream is
/// identified by (seed, stream id); distinct ids give statistically
/// independent sequences, which is how tiles, pixels and worker chunks get
/// their own generators. Single-owner: never share one across threads.
class RandomStream {
public:
    explicit RandomStream(uint64_t seed = 0, uint64_t stream = 0);

    uint32_t next_u32();
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Independent child stream derived from this stream's identity (not
    /// its position).
    RandomStream split(uint64_t child) const;

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_; }
    /// Number of 32-bit words drawn so far.
    uint64_t position() const { return position_; }

private:
    uint64_t seed_, stream_;
    uint64_t state_ = 0, inc_ = 0;
    uint64_t position_ = 0;
};

/// SplitMix64 finaliser; used to derive stream ids from pixel indices etc.
uint64_t mix_bits(uint64_t v);

}  // namespace msbsdf
