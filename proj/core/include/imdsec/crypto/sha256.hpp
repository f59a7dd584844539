#pragma once

#include <array>
#include <cstdint>

#include "imdsec/bytes.hpp"

namespace imdsec::crypto {

using Digest256 = std::array<std::uint8_t, 32>;

class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(BytesView data);
    Digest256 finish();

    static Digest256 digest(BytesView data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::uint64_t totalBytes_ = 0;
    std::array<std::uint8_t, 64> buffer_{};
    std::size_t bufferLen_ = 0;
};

}  // namespace imdsec::crypto
