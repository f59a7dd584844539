#include "doctest.h"
#include "security_harness.hpp"

using namespace imdsec;
using namespace imdsec::harness;

// Smaller batches here; the acceptance suite runs the full thousand per
// phase. Zero violations tolerated either way.

TEST_CASE("security properties hold under randomized reader-card-auth tampering") {
    auto v = run_security_batch(Phase::ReaderCardAuth, 60, 0xAA00);
    INFO(v.summary());
    CHECK(v.total() == 0);
}

TEST_CASE("security properties hold under randomized user-auth tampering") {
    auto v = run_security_batch(Phase::UserAuth, 60, 0xBB00);
    INFO(v.summary());
    CHECK(v.total() == 0);
}

TEST_CASE("security properties hold under randomized session-key tampering") {
    auto v = run_security_batch(Phase::SessionKey, 60, 0xCC00);
    INFO(v.summary());
    CHECK(v.total() == 0);
}

TEST_CASE("security properties hold under randomized main-phase tampering") {
    auto v = run_security_batch(Phase::MainPhase, 60, 0xDD00);
    INFO(v.summary());
    CHECK(v.total() == 0);
}
