#pragma once

#include <cstdint>
#include <optional>

#include "imdsec/bytes.hpp"
#include "imdsec/crypto/suite.hpp"
#include "imdsec/types.hpp"
#include "imdsec/wire.hpp"

namespace imdsec::puzzle {

/// Puzzle hash width n; the server secret K_S plus (ID_R, t) determine x.
inline constexpr std::size_t kHashBits = 256;

/// x = hash(ID_R || t || K_S).
crypto::Digest256 puzzle_preimage(const EntityId& readerId, std::uint64_t timestampMs,
                                  const SymmetricKey& serverSecret);

/// Builds the challenge: h(x), x with its first k bits withheld, and t.
/// Issuing stores nothing server-side; verification recomputes x.
wire::PuzzleChallenge issue(const EntityId& readerId, std::uint64_t nowMs,
                            const SymmetricKey& serverSecret, std::uint8_t difficulty);

/// Exhaustive search over the 2^k missing prefixes; k = 0 yields an empty
/// solution. Returns the packed prefix bits and the number of hash
/// evaluations spent (the DoS work metric).
struct SolveOutcome {
    Bytes solution;
    std::uint64_t hashEvaluations = 0;
};
std::optional<SolveOutcome> solve(const wire::PuzzleChallenge& challenge);

enum class VerifyResult : std::uint8_t { Accept, WrongSolution, Expired };

/// Stateless: recomputes x from (readerId, t, K_S) and checks the prefix
/// and the expiry window.
VerifyResult verify(const EntityId& readerId, std::uint64_t timestampMs,
                    std::uint8_t difficulty, BytesView solution,
                    const SymmetricKey& serverSecret, std::uint64_t nowMs,
                    std::uint64_t expiryWindowMs);

/// First k bits of `digest`, packed MSB-first into ceil(k/8) bytes.
Bytes prefix_bits(const crypto::Digest256& digest, std::uint8_t k);

/// Remaining n-k bits, packed MSB-first.
Bytes suffix_bits(const crypto::Digest256& digest, std::uint8_t k);

/// Reassemble a candidate x from a k-bit prefix and the published suffix.
crypto::Digest256 assemble(BytesView prefix, std::uint8_t k, BytesView suffix);

}  // namespace imdsec::puzzle
