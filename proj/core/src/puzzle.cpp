#include "imdsec/puzzle.hpp"

namespace imdsec::puzzle {

namespace {

bool get_bit(BytesView data, std::size_t i) {
    return (data[i / 8] >> (7 - i % 8)) & 1;
}

void set_bit(std::uint8_t* data, std::size_t i, bool v) {
    if (v)
        data[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
    else
        data[i / 8] &= static_cast<std::uint8_t>(~(0x80 >> (i % 8)));
}

}  // namespace

crypto::Digest256 puzzle_preimage(const EntityId& readerId, std::uint64_t timestampMs,
                                  const SymmetricKey& serverSecret) {
    ByteWriter w;
    w.raw(BytesView(readerId.raw.data(), readerId.raw.size()));
    w.u64(timestampMs);
    w.raw(BytesView(serverSecret.raw.data(), serverSecret.raw.size()));
    return crypto::hash(w.bytes());
}

Bytes prefix_bits(const crypto::Digest256& digest, std::uint8_t k) {
    Bytes out((k + 7) / 8, 0);
    for (std::size_t i = 0; i < k; ++i)
        set_bit(out.data(), i, get_bit(BytesView(digest.data(), digest.size()), i));
    return out;
}

Bytes suffix_bits(const crypto::Digest256& digest, std::uint8_t k) {
    std::size_t bits = kHashBits - k;
    Bytes out((bits + 7) / 8, 0);
    for (std::size_t i = 0; i < bits; ++i)
        set_bit(out.data(), i, get_bit(BytesView(digest.data(), digest.size()), k + i));
    return out;
}

crypto::Digest256 assemble(BytesView prefix, std::uint8_t k, BytesView suffix) {
    crypto::Digest256 x{};
    for (std::size_t i = 0; i < k; ++i) set_bit(x.data(), i, get_bit(prefix, i));
    for (std::size_t i = 0; i < kHashBits - k; ++i) set_bit(x.data(), k + i, get_bit(suffix, i));
    return x;
}

wire::PuzzleChallenge issue(const EntityId& readerId, std::uint64_t nowMs,
                            const SymmetricKey& serverSecret, std::uint8_t difficulty) {
    auto x = puzzle_preimage(readerId, nowMs, serverSecret);
    wire::PuzzleChallenge c;
    c.digestOfX = crypto::hash(BytesView(x.data(), x.size()));
    c.difficulty = difficulty;
    c.partialX = suffix_bits(x, difficulty);
    c.timestampMs = nowMs;
    return c;
}

std::optional<SolveOutcome> solve(const wire::PuzzleChallenge& challenge) {
    std::uint8_t k = challenge.difficulty;
    if (k > 24) return std::nullopt;  // solver work bound
    std::size_t suffixBits = kHashBits - k;
    if (challenge.partialX.size() != (suffixBits + 7) / 8) return std::nullopt;

    SolveOutcome out;
    std::uint32_t total = 1u << k;
    for (std::uint32_t candidate = 0; candidate < total; ++candidate) {
        Bytes prefix((k + 7) / 8, 0);
        for (std::uint8_t i = 0; i < k; ++i)
            set_bit(prefix.data(), i, (candidate >> (k - 1 - i)) & 1);
        auto x = assemble(BytesView(prefix.data(), prefix.size()), k,
                          BytesView(challenge.partialX.data(), challenge.partialX.size()));
        ++out.hashEvaluations;
        if (crypto::hash(BytesView(x.data(), x.size())) == challenge.digestOfX) {
            out.solution = std::move(prefix);
            return out;
        }
    }
    return std::nullopt;
}

VerifyResult verify(const EntityId& readerId, std::uint64_t timestampMs,
                    std::uint8_t difficulty, BytesView solution,
                    const SymmetricKey& serverSecret, std::uint64_t nowMs,
                    std::uint64_t expiryWindowMs) {
    if (timestampMs > nowMs || nowMs - timestampMs > expiryWindowMs) return VerifyResult::Expired;
    if (solution.size() != std::size_t((difficulty + 7) / 8)) return VerifyResult::WrongSolution;

    auto x = puzzle_preimage(readerId, timestampMs, serverSecret);
    auto expect = prefix_bits(x, difficulty);
    for (std::size_t i = 0; i < difficulty; ++i) {
        if (get_bit(solution, i) != get_bit(BytesView(expect.data(), expect.size()), i))
            return VerifyResult::WrongSolution;
    }
    return VerifyResult::Accept;
}

}  // namespace imdsec::puzzle
