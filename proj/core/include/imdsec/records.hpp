#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "imdsec/bytes.hpp"
#include "imdsec/types.hpp"

namespace imdsec {

/// Non-repudiation evidence stored in implant flash, 72 bytes encoded:
/// sig(48) || cmd(4) || cardId(12) || cardNonce(4) || readerNonce(4).
/// Stored only for commands whose required privilege exceeds read-only.
struct SignatureRecord {
    Signature sig{};
    Command cmd{};
    EntityId cardId{};
    Nonce cardNonce{};
    Nonce readerNonce{};

    static constexpr std::size_t kEncodedBytes = 72;

    Bytes encode() const;
    static std::optional<SignatureRecord> decode(BytesView data);

    /// Byte string the card signed: cmd || readerNonce || cardNonce.
    Bytes signed_payload() const;

    bool operator==(const SignatureRecord&) const = default;
};

/// Strict-FIFO ring buffer over a byte-capacity flash region.
/// capacity_records = floor(capacityBytes / 72); a 32 kB region holds 455.
class SignatureFlash {
public:
    explicit SignatureFlash(std::size_t capacityBytes = 32768)
        : capacityRecords_(capacityBytes / SignatureRecord::kEncodedBytes) {}

    /// Appends and returns the slot index written; overwrites the oldest
    /// slot once full.
    std::size_t store(const SignatureRecord& record);

    std::size_t capacity_records() const { return capacityRecords_; }
    std::size_t size() const { return records_.size(); }
    std::uint64_t total_writes() const { return totalWrites_; }

    const SignatureRecord& at_slot(std::size_t slot) const { return records_.at(slot); }
    const std::vector<SignatureRecord>& slots() const { return records_; }

    /// Records in slot order; the audit dump format.
    Bytes dump() const;

    static std::vector<SignatureRecord> parse_dump(BytesView data, std::size_t* badTrailing);

private:
    std::size_t capacityRecords_;
    std::vector<SignatureRecord> records_;
    std::size_t nextSlot_ = 0;
    std::uint64_t totalWrites_ = 0;
};

}  // namespace imdsec
