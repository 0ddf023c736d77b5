// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/random.h"

namespace msbsdf {

namespace {
constexpr uint64_t kMultiplier = 0x5851f42d4c957f2dULL;
}

uint64_t mix_bits(uint64_t v) {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

RandomStream::RandomStream(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {
    inc_ = (mix_bits(stream ^ 0xda3e39cb94b95bdbULL) << 1u) | 1u;
    state_ = 0;
    next_u32();
    state_ += mix_bits(seed);
    next_u32();
    position_ = 0;
}

uint32_t RandomStream::next_u32() {
    const uint64_t old = state_;
    state_ = old * kMultiplier + inc_;
    const auto xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<uint32_t>(old >> 59u);
    ++position_;
    return (xorshifted >> rot) | (xorshifted << ((~rot + 1u) & 31u));
}

double RandomStream::uniform() {
    const uint64_t hi = next_u32() >> 5;  // 27 bits
    const uint64_t lo = next_u32() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

RandomStream RandomStream::split(uint64_t child) const {
    return RandomStream(seed_, mix_bits(stream_ * 0x9e3779b97f4a7c15ULL + child + 1));
}

}  // namespace msbsdf
