#include "imdsec/entities/common.hpp"

#include "imdsec/crypto/suite.hpp"

namespace imdsec::entities {

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::RF: return "rf";
        case Channel::OOB: return "oob";
        case Channel::Internet: return "internet";
        case Channel::CardSlot: return "cardslot";
    }
    return "?";
}

Certificate CertificateAuthority::issue(const EntityId& subject, EntityClass cls, Privilege priv,
                                        const PublicKey& pub) const {
    Certificate cert;
    cert.subject = subject;
    cert.subjectClass = cls;
    cert.privileges = priv;
    cert.publicKey = pub;
    auto payload = cert.signed_payload();
    cert.signature = crypto::sign(keys.priv, BytesView(payload.data(), payload.size()));
    return cert;
}

bool CertificateAuthority::check(const Certificate& cert) const {
    auto payload = cert.signed_payload();
    return crypto::verify_sig(keys.pub, BytesView(payload.data(), payload.size()), cert.signature);
}

}  // namespace imdsec::entities
