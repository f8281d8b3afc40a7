#include <doctest.h>

#include <random>
#include <vector>

#include "spintrack/simgen.hpp"
#include "spintrack/wire.hpp"

using namespace spintrack;
using namespace spintrack::wire;

TEST_CASE("classify_header dispatches on the first byte") {
    CHECK(classify_header(std::vector<std::uint8_t>{0xC3}) == HeaderForm::Long);
    CHECK(classify_header(std::vector<std::uint8_t>{0x61}) == HeaderForm::Short);
    CHECK(classify_header(std::vector<std::uint8_t>{0x21}) == HeaderForm::NotQuic);  // fixed bit clear
    CHECK(classify_header(std::vector<std::uint8_t>{}) == HeaderForm::NotQuic);
}

TEST_CASE("classify_header never looks past byte zero") {
    // identical first byte, wildly different tails
    std::vector<std::uint8_t> a{0x40}, b{0x40, 0xFF, 0x00, 0x13};
    CHECK(classify_header(a) == classify_header(b));
}

TEST_CASE("parse_long_header extracts version and CIDs") {
    std::vector<std::uint8_t> p{0xC3, 0x00, 0x00, 0x00, 0x01, 0x04, 0xAA, 0xBB, 0xCC, 0xDD, 0x00};
    auto r = parse_long_header(p);
    REQUIRE(r.ok());
    CHECK(r->version == 1);
    CHECK(r->dcid.length == 4);
    CHECK(r->dcid.bytes[0] == 0xAA);
    CHECK(r->dcid.bytes[3] == 0xDD);
    CHECK(r->scid.length == 0);
}

TEST_CASE("parse_long_header zero-length CIDs") {
    std::vector<std::uint8_t> p{0xC0, 0, 0, 0, 1, 0x00, 0x00};
    auto r = parse_long_header(p);
    REQUIRE(r.ok());
    CHECK(r->dcid.empty());
    CHECK(r->scid.empty());
}

TEST_CASE("parse_long_header error paths") {
    SUBCASE("oversize cid") {
        std::vector<std::uint8_t> p{0xC0, 0, 0, 0, 1, 0x15};  // 21 > 20
        p.resize(30, 0);
        auto r = parse_long_header(p);
        REQUIRE(!r.ok());
        CHECK(r.error == ParseError::OversizeCid);
    }
    SUBCASE("declared length exceeds payload") {
        std::vector<std::uint8_t> p{0xC0, 0, 0, 0, 1, 0x08, 0x01};
        auto r = parse_long_header(p);
        REQUIRE(!r.ok());
        CHECK(r.error == ParseError::Truncated);
    }
    SUBCASE("too short for version") {
        std::vector<std::uint8_t> p{0xC0, 0, 0};
        CHECK(!parse_long_header(p).ok());
    }
}

TEST_CASE("parse_short_header spin bit and dcid") {
    SUBCASE("spin set, no dcid") {
        std::vector<std::uint8_t> p{0x61};
        auto r = parse_short_header(p, 0);
        REQUIRE(r.ok());
        CHECK(r->spin_bit);
        CHECK(r->dcid.empty());
    }
    SUBCASE("spin clear, 4-byte dcid") {
        std::vector<std::uint8_t> p{0x41, 0x01, 0x02, 0x03, 0x04, 0x99};
        auto r = parse_short_header(p, 4);
        REQUIRE(r.ok());
        CHECK(!r->spin_bit);
        CHECK(r->dcid.length == 4);
        CHECK(r->dcid.bytes[2] == 0x03);
    }
    SUBCASE("truncated") {
        std::vector<std::uint8_t> p{0x41, 0x01, 0x02};
        auto r = parse_short_header(p, 8);
        REQUIRE(!r.ok());
        CHECK(r.error == ParseError::Truncated);
    }
}

TEST_CASE("zero dcid_len always yields empty dcid") {
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::uint8_t> p(1 + rng() % 40);
        for (auto& b : p) b = std::uint8_t(rng());
        p[0] = std::uint8_t((p[0] & ~0x80) | 0x40);  // force short form
        auto r = parse_short_header(p, 0);
        REQUIRE(r.ok());
        CHECK(r->dcid.length == 0);
    }
}

TEST_CASE("builder round-trip is a fixed point on spin and dcid") {
    std::mt19937 rng(9);
    for (int i = 0; i < 200; ++i) {
        ConnectionId cid;
        cid.length = std::uint8_t(rng() % 21);
        for (int k = 0; k < cid.length; ++k) cid.bytes[k] = std::uint8_t(rng());
        const bool spin = (rng() & 1) != 0;
        const auto payload = simgen::build_short_header(spin, cid);
        CHECK(classify_header(payload) == HeaderForm::Short);
        auto r = parse_short_header(payload, cid.length);
        REQUIRE(r.ok());
        CHECK(r->spin_bit == spin);
        CHECK(r->dcid == cid);
        // rebuild from the parsed fields and parse again
        const auto rebuilt = simgen::build_short_header(r->spin_bit, r->dcid);
        auto r2 = parse_short_header(rebuilt, cid.length);
        REQUIRE(r2.ok());
        CHECK(r2->spin_bit == r->spin_bit);
        CHECK(r2->dcid == r->dcid);
    }
}
