#pragma once

#include <cstdint>

#include "imdsec/bytes.hpp"

namespace imdsec {

/// Seedable deterministic randomness source (splitmix64 core).
///
/// Every random draw in a simulation flows through one of these, derived
/// from the world seed, so a fixed seed reproduces a whole run byte for
/// byte. Not a cryptographic RNG; the simulator's adversary is symbolic
/// and never brute-forces key material.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

    /// Uniform in [0, bound); bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

    double unit() { return (next_u64() >> 11) * (1.0 / 9007199254740992.0); }

    void fill(std::uint8_t* out, std::size_t n) {
        std::size_t i = 0;
        while (i < n) {
            std::uint64_t v = next_u64();
            for (int s = 56; s >= 0 && i < n; s -= 8) out[i++] = static_cast<std::uint8_t>(v >> s);
        }
    }

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out.data(), n);
        return out;
    }

    /// Independent child stream; used to hand each entity its own source.
    Rng fork(std::uint64_t label) {
        Rng child(state_ ^ (label * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
        child.next_u64();
        return child;
    }

private:
    std::uint64_t state_;
};

}  // namespace imdsec
