#include "imdsec/audit.hpp"

#include <sstream>

#include "imdsec/crypto/suite.hpp"

namespace imdsec {

AuditReport audit_flash_dump(BytesView dump, const Certificate& cardCert) {
    AuditReport report;
    std::size_t off = 0;
    std::size_t index = 0;
    while (off + SignatureRecord::kEncodedBytes <= dump.size()) {
        AuditEntry e;
        e.index = index++;
        auto rec = SignatureRecord::decode(dump.subspan(off, SignatureRecord::kEncodedBytes));
        if (rec) {
            e.record = *rec;
            e.cardMatches = rec->cardId == cardCert.subject;
            auto payload = rec->signed_payload();
            e.verified = e.cardMatches &&
                         crypto::verify_sig(cardCert.publicKey,
                                            BytesView(payload.data(), payload.size()), rec->sig);
        }
        // Undecodable slots stay in the report as unverified evidence.
        report.entries.push_back(e);
        off += SignatureRecord::kEncodedBytes;
    }
    report.trailingBytes = dump.size() - off;
    return report;
}

std::string audit_report_text(const AuditReport& report) {
    std::ostringstream os;
    for (const auto& e : report.entries) {
        os << "record " << e.index << " card=" << e.record.cardId.hex()
           << " cmd=" << e.record.cmd.word() << " readerNonce=" << e.record.readerNonce.value
           << " cardNonce=" << e.record.cardNonce.value << " "
           << (e.verified ? "VERIFIED" : (e.cardMatches ? "SIGNATURE-INVALID" : "FOREIGN-CARD"))
           << "\n";
    }
    os << "records=" << report.entries.size() << " verified=" << report.verified_count()
       << " failed=" << report.failed_count() << " trailing_bytes=" << report.trailingBytes << "\n";
    return os.str();
}

}  // namespace imdsec
