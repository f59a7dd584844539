#pragma once

#include <string>
#include <vector>

#include "imdsec/records.hpp"
#include "imdsec/types.hpp"

namespace imdsec {

/// Offline verification of a signature-flash dump against a card
/// certificate: the non-repudiation evidence check.
struct AuditEntry {
    std::size_t index = 0;
    SignatureRecord record{};
    bool cardMatches = false;  // record.cardId == certificate subject
    bool verified = false;     // signature valid over cmd || nonces
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    std::size_t trailingBytes = 0;  // dump length not divisible by 72

    std::size_t verified_count() const {
        std::size_t n = 0;
        for (const auto& e : entries)
            if (e.verified) ++n;
        return n;
    }
    std::size_t failed_count() const { return entries.size() - verified_count(); }
};

AuditReport audit_flash_dump(BytesView dump, const Certificate& cardCert);

std::string audit_report_text(const AuditReport& report);

}  // namespace imdsec
