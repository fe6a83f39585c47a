#pragma once

#include <cstdint>

namespace asr {

// Counter-based random generation: every draw is a pure function of
// (seed, path, step), so simulation results do not depend on evaluation
// order or thread scheduling.
namespace rng {

// SplitMix64 finalizer; full-period bijective mixer on 64 bits.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Hash a (seed, path, step) counter triple into 64 uniform bits.
// Two mixing rounds decorrelate nearby counters.
inline uint64_t counter_hash(uint64_t seed, uint64_t path, uint64_t step) {
    uint64_t h = mix64(seed ^ 0xa0761d6478bd642fULL);
    h = mix64(h ^ (path * 0xe7037ed1a0b428dbULL));
    h = mix64(h ^ (step * 0x8ebc6af09c88c6e3ULL));
    return h;
}

// Uniform on the open interval (0, 1); never returns 0 or 1 so the
// normal quantile below stays finite.
inline double uniform01(uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace rng

// Inverse standard normal CDF, Wichura's AS241 (PPND16).
// Absolute error below 1e-15 on (0, 1); used for quantile draws and for
// the worst-case spot projection in the network policy bounds.
double normal_icdf(double p);

// Standard normal draw keyed on a counter triple.
inline double normal_draw(uint64_t seed, uint64_t path, uint64_t step) {
    return normal_icdf(rng::uniform01(rng::counter_hash(seed, path, step)));
}

// Uniform (0,1) draw keyed on a counter triple.
inline double uniform_draw(uint64_t seed, uint64_t path, uint64_t step) {
    return rng::uniform01(rng::counter_hash(seed, path, step));
}

} // namespace asr
