#include "imdsec/records.hpp"

namespace imdsec {

Bytes SignatureRecord::encode() const {
    ByteWriter w;
    w.raw(BytesView(sig.raw.data(), sig.raw.size()));
    w.u32(cmd.word());
    w.raw(BytesView(cardId.raw.data(), cardId.raw.size()));
    w.u32(cardNonce.value);
    w.u32(readerNonce.value);
    return w.take();
}

std::optional<SignatureRecord> SignatureRecord::decode(BytesView data) {
    if (data.size() != kEncodedBytes) return std::nullopt;
    ByteReader r(data);
    SignatureRecord rec;
    rec.sig.raw = r.arr<kSignatureBytes>();
    auto cmd = Command::from_word(r.u32());
    if (!cmd) return std::nullopt;
    rec.cmd = *cmd;
    rec.cardId.raw = r.arr<kEntityIdBytes>();
    rec.cardNonce.value = r.u32();
    rec.readerNonce.value = r.u32();
    return rec;
}

Bytes SignatureRecord::signed_payload() const {
    ByteWriter w;
    w.u32(cmd.word());
    w.u32(readerNonce.value);
    w.u32(cardNonce.value);
    return w.take();
}

std::size_t SignatureFlash::store(const SignatureRecord& record) {
    ++totalWrites_;
    std::size_t slot = nextSlot_;
    if (records_.size() < capacityRecords_) {
        records_.push_back(record);
    } else {
        records_[slot] = record;
    }
    nextSlot_ = (nextSlot_ + 1) % capacityRecords_;
    return slot;
}

Bytes SignatureFlash::dump() const {
    Bytes out;
    out.reserve(records_.size() * SignatureRecord::kEncodedBytes);
    for (const auto& r : records_) {
        auto enc = r.encode();
        out.insert(out.end(), enc.begin(), enc.end());
    }
    return out;
}

std::vector<SignatureRecord> SignatureFlash::parse_dump(BytesView data, std::size_t* badTrailing) {
    std::vector<SignatureRecord> out;
    std::size_t off = 0;
    while (off + SignatureRecord::kEncodedBytes <= data.size()) {
        auto rec = SignatureRecord::decode(data.subspan(off, SignatureRecord::kEncodedBytes));
        if (rec) out.push_back(*rec);
        off += SignatureRecord::kEncodedBytes;
    }
    if (badTrailing) *badTrailing = data.size() - off;
    return out;
}

}  // namespace imdsec
