#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "spintrack/postproc.hpp"

using namespace spintrack;
using namespace spintrack::postproc;

TEST_CASE("ring push updates sum, index and eviction") {
    RingState ring(4);
    for (Rtt16 v : {10, 20, 30, 40}) ring.push(v);
    CHECK(ring.sum() == 100);
    CHECK(ring.fill() == 4);

    auto evicted = ring.push(50);
    REQUIRE(evicted);
    CHECK(*evicted == 10);
    CHECK(ring.sum() == 140);
    CHECK(ring.entries()[0] == 50);
}

TEST_CASE("empty ring accepts without eviction") {
    RingState ring(4);
    auto evicted = ring.push(40);
    CHECK(!evicted);
    CHECK(ring.sum() == 40);
    CHECK(ring.fill() == 1);
}

TEST_CASE("pushing W identical values gives sum W*v") {
    RingState ring(8);
    for (int i = 0; i < 8; ++i) ring.push(7);
    CHECK(ring.sum() == 56);
}

TEST_CASE("mean") {
    RingState ring(4);
    CHECK(!ring.mean());  // undefined on empty
    for (Rtt16 v : {40, 40, 41, 40}) ring.push(v);
    CHECK(*ring.mean() == 40);  // floor(161/4)
    RingState r2(4);
    r2.push(101);
    r2.push(0);
    r2.push(0);
    r2.push(0);
    CHECK(*r2.mean() == 25);  // floor
}

TEST_CASE("sum conservation under random push sequences") {
    std::mt19937 rng(4);
    RingState ring(4);
    for (int i = 0; i < 5000; ++i) {
        ring.push(Rtt16(rng() % 2000));
        std::uint64_t s = 0;
        for (std::uint32_t k = 0; k < ring.fill(); ++k) s += ring.entries()[k];
        CHECK(s == ring.sum());
        if (ring.fill()) {
            Rtt16 lo = 0xFFFF, hi = 0;
            for (std::uint32_t k = 0; k < ring.fill(); ++k) {
                lo = std::min(lo, ring.entries()[k]);
                hi = std::max(hi, ring.entries()[k]);
            }
            CHECK(*ring.mean() >= lo);
            CHECK(*ring.mean() <= hi);
        }
    }
}

namespace {
RingState full_ring(std::initializer_list<Rtt16> vals) {
    RingState r(std::uint32_t(vals.size()));
    for (auto v : vals) r.push(v);
    return r;
}
}  // namespace

TEST_CASE("default classification rules") {
    const auto cfg = ClassConfig::defaults();
    ClassCounters counters(cfg.class_count());

    SUBCASE("tiny rtt is greased regardless of ring") {
        RingState empty(4);
        CHECK(cfg.class_name(classify(2, empty, cfg, counters)) == "greased");
        auto ring = full_ring({40, 40, 40, 40});
        CHECK(cfg.class_name(classify(2, ring, cfg, counters)) == "greased");
    }
    SUBCASE("within 10 percent of mean is stable") {
        auto ring = full_ring({40, 40, 40, 40});
        CHECK(cfg.class_name(classify(40, ring, cfg, counters)) == "stable");
        CHECK(cfg.class_name(classify(44, ring, cfg, counters)) == "stable");
        CHECK(cfg.class_name(classify(36, ring, cfg, counters)) == "stable");
    }
    SUBCASE("outside the band is unstable") {
        auto ring = full_ring({40, 40, 40, 40});
        CHECK(cfg.class_name(classify(60, ring, cfg, counters)) == "unstable");
        CHECK(cfg.class_name(classify(30, ring, cfg, counters)) == "unstable");
    }
    SUBCASE("partial ring sends non-greased samples to warm-up") {
        RingState ring(4);
        ring.push(40);
        const auto id = classify(40, ring, cfg, counters);
        CHECK(id == cfg.warmup_bucket());
        CHECK(cfg.class_name(id) == "warmup");
    }
}

TEST_CASE("every sample increments exactly one counter") {
    const auto cfg = ClassConfig::defaults();
    ClassCounters counters(cfg.class_count());
    std::mt19937 rng(11);
    RingState ring(4);
    for (int i = 0; i < 2000; ++i) {
        const Rtt16 rtt = Rtt16(rng() % 200);
        classify(rtt, ring, cfg, counters);
        ring.push(rtt);
        CHECK(counters.total() == std::uint64_t(i + 1));
    }
}

TEST_CASE("stable/unstable decision is scale invariant") {
    const auto cfg = ClassConfig::defaults();
    std::mt19937 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const Rtt16 base = Rtt16(6 + rng() % 100);
        Rtt16 vals[4];
        for (auto& v : vals) v = Rtt16(base + rng() % 8);
        const Rtt16 probe = Rtt16(base + rng() % 16);
        for (Rtt16 k : {Rtt16(2), Rtt16(5), Rtt16(13)}) {
            if (std::uint32_t(probe) * k > 0xFFFF) continue;
            auto ring1 = full_ring({vals[0], vals[1], vals[2], vals[3]});
            auto ring2 = full_ring({Rtt16(vals[0] * k), Rtt16(vals[1] * k), Rtt16(vals[2] * k),
                                    Rtt16(vals[3] * k)});
            ClassCounters c1(cfg.class_count()), c2(cfg.class_count());
            const auto id1 = classify(probe, ring1, cfg, c1);
            const auto id2 = classify(Rtt16(probe * k), ring2, cfg, c2);
            // only guaranteed while neither probe crosses the greased bound
            if (probe >= 5 && probe * k >= 5) CHECK(id1 == id2);
        }
    }
}

TEST_CASE("class config file parsing") {
    const std::string path = std::string(std::tmpnam(nullptr)) + ".classes";
    SUBCASE("valid config") {
        std::ofstream(path) << "# classes\n"
                               "low,0,9,*,*\n"
                               "steady,*,*,85,115\n"
                               "rest,*,*,*,*\n";
        ClassConfig cfg;
        std::string err;
        REQUIRE(cfg.load_file(path, err));
        CHECK(cfg.class_count() == 3);
        CHECK(cfg.rules()[0].rtt_max == 9);
        CHECK(cfg.rules()[1].ratio_min_pct == 85);
        ClassCounters counters(cfg.class_count());
        auto ring = full_ring({100, 100, 100, 100});
        CHECK(cfg.class_name(classify(5, ring, cfg, counters)) == "low");
        CHECK(cfg.class_name(classify(100, ring, cfg, counters)) == "steady");
        CHECK(cfg.class_name(classify(300, ring, cfg, counters)) == "rest");
    }
    SUBCASE("missing catch-all rejected") {
        std::ofstream(path) << "low,0,9,*,*\n";
        ClassConfig cfg;
        std::string err;
        CHECK(!cfg.load_file(path, err));
    }
    SUBCASE("too many rules rejected") {
        std::ofstream f(path);
        for (int i = 0; i < 9; ++i) f << "c" << i << ",*,*,*,*\n";
        f.close();
        ClassConfig cfg;
        std::string err;
        CHECK(!cfg.load_file(path, err));
    }
    std::remove(path.c_str());
}
