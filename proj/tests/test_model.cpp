#include "doctest.h"

#include <algorithm>
#include <random>

#include "hseq/model.hpp"
#include "hseq/sha1.hpp"
#include "test_helpers.hpp"

using namespace hseq;
using test::text_segment;

TEST_CASE("sha1 matches known vectors") {
    CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(sha1_hex("Hello world.") == "e44f3364019d18a151cab7072b5a40bb5b3e274f");
    // Block-boundary lengths exercise the padding paths.
    CHECK(sha1_hex(std::string(55, 'a')).size() == 40);
    CHECK(sha1_hex(std::string(56, 'a')) != sha1_hex(std::string(57, 'a')));
    CHECK(sha1_hex(std::string(64, 'a')) == sha1_hex(std::string(64, 'a')));
}

TEST_CASE("validate: empty Hseq is vacuously valid") {
    CHECK(validate(Hseq{}).empty());
}

TEST_CASE("validate: child preceding its parent is flagged") {
    std::vector<Segment> segs;
    segs.push_back(text_segment("p1", LevelTag::paragraph, "u", {0, 4}, "text",
                                std::string("doc")));
    segs.push_back(text_segment("doc", LevelTag::document, "u", {0, 4}, ""));
    auto report = validate(Hseq(std::move(segs)));
    REQUIRE(report.size() == 1);
    CHECK(report[0].rule == "parent-before-child");
    CHECK(report[0].segment_id == "p1");
}

TEST_CASE("validate: duplicate id names the offender") {
    std::vector<Segment> segs;
    segs.push_back(text_segment("doc", LevelTag::document, "u", {0, 8}, ""));
    segs.push_back(text_segment("p_1", LevelTag::paragraph, "u", {0, 4}, "text",
                                std::string("doc")));
    segs.push_back(text_segment("p_1", LevelTag::paragraph, "u", {4, 8}, "more",
                                std::string("doc")));
    auto report = validate(Hseq(std::move(segs)));
    REQUIRE(report.size() == 1);
    CHECK(report[0].rule == "duplicate-id");
    CHECK(report[0].segment_id == "p_1");
}

TEST_CASE("validate: schema placement and kg offsets") {
    Segment table;
    table.id = "t0";
    table.level = LevelTag::table;
    table.content = std::string();
    table.metadata.uri = "tbl://x";
    table.metadata.offsets = {-1, -1};
    table.metadata.source_type = SourceType::table;
    // no schema -> violation
    auto report = validate(Hseq({table}));
    REQUIRE(report.size() == 1);
    CHECK(report[0].rule == "schema-placement");

    Segment trip;
    trip.id = "tr0";
    trip.level = LevelTag::triplet;
    trip.content = TripleContent{"a", "r", "b"};
    trip.metadata.uri = "kg://x";
    trip.metadata.offsets = {0, 0};  // must be (-1,-1)
    trip.metadata.source_type = SourceType::kg;
    report = validate(Hseq({trip}));
    REQUIRE(report.size() == 1);
    CHECK(report[0].rule == "kg-offsets");
}

TEST_CASE("rho_compare orders levels paragraph < row < sentence < triplet") {
    auto para = text_segment("p", LevelTag::paragraph, "u", {0, 1}, "x");
    Segment trip;
    trip.id = "tr";
    trip.level = LevelTag::triplet;
    trip.content = TripleContent{"a", "r", "b"};
    trip.metadata.uri = "u";
    trip.metadata.offsets = {-1, -1};
    CHECK(rho_compare(para, trip) < 0);
    CHECK(rho_compare(trip, para) > 0);
    CHECK(rho_compare(para, para) == 0);
}

TEST_CASE("rho_compare breaks ties by offsets within a uri") {
    auto a = text_segment("a", LevelTag::paragraph, "u", {0, 9}, "x");
    auto b = text_segment("b", LevelTag::paragraph, "u", {11, 17}, "y");
    CHECK(rho_compare(a, b) < 0);
}

namespace {

// Independent comparator: explicit key tuples, no shared code with rho_compare.
int reference_compare(const Segment& a, const Segment& b) {
    auto rank = [](LevelTag l) {
        if (l == LevelTag::paragraph) return 0;
        if (l == LevelTag::table_row) return 1;
        if (l == LevelTag::sentence) return 2;
        if (l == LevelTag::triplet) return 3;
        return 4;
    };
    auto ka = std::make_tuple(rank(a.level), a.metadata.uri, a.metadata.offsets, a.id);
    auto kb = std::make_tuple(rank(b.level), b.metadata.uri, b.metadata.offsets, b.id);
    if (ka < kb) return -1;
    if (kb < ka) return 1;
    return 0;
}

std::vector<Segment> random_segments(uint64_t seed, size_t n) {
    std::mt19937_64 rng(seed);
    std::vector<Segment> segs;
    const LevelTag levels[] = {LevelTag::paragraph, LevelTag::table_row, LevelTag::sentence,
                               LevelTag::triplet, LevelTag::document};
    for (size_t i = 0; i < n; ++i) {
        LevelTag level = levels[rng() % 5];
        Segment s;
        s.id = "s" + std::to_string(rng() % 40);
        s.level = level;
        s.metadata.uri = "u" + std::to_string(rng() % 3);
        if (level == LevelTag::triplet) {
            s.content = TripleContent{"h", "r", "t"};
            s.metadata.offsets = {-1, -1};
        } else if (level == LevelTag::table_row) {
            s.content = RowContent{{"c", "v"}};
            s.metadata.offsets = {static_cast<long long>(rng() % 5), -1};
        } else {
            s.content = std::string("text");
            long long a = static_cast<long long>(rng() % 50);
            s.metadata.offsets = {a, a + static_cast<long long>(rng() % 10)};
        }
        segs.push_back(std::move(s));
    }
    return segs;
}

}  // namespace

TEST_CASE("rho_compare agrees with a brute-force comparator on a 20-segment fixture") {
    auto fixture = random_segments(20260810, 20);
    auto sorted_rho = fixture;
    std::stable_sort(sorted_rho.begin(), sorted_rho.end(),
                     [](const Segment& a, const Segment& b) { return rho_compare(a, b) < 0; });
    auto sorted_ref = fixture;
    std::stable_sort(sorted_ref.begin(), sorted_ref.end(),
                     [](const Segment& a, const Segment& b) { return reference_compare(a, b) < 0; });
    CHECK(sorted_rho == sorted_ref);
}

TEST_CASE("rho_compare is a strict total order on random segments") {
    auto segs = random_segments(99, 60);
    for (const auto& a : segs) {
        CHECK(rho_compare(a, a) == 0);
        for (const auto& b : segs) {
            int ab = rho_compare(a, b);
            int ba = rho_compare(b, a);
            CHECK(((ab < 0 && ba > 0) || (ab > 0 && ba < 0) || (ab == 0 && ba == 0)));
            if (ab == 0) CHECK(reference_compare(a, b) == 0);
            for (const auto& c : segs) {
                if (ab <= 0 && rho_compare(b, c) <= 0) {
                    CHECK(rho_compare(a, c) <= 0);
                }
            }
        }
    }
}

namespace {

// Test-local deep equality, written field-by-field, independent of operator==.
bool deep_equal(const Segment& a, const Segment& b) {
    if (a.id != b.id) return false;
    if (level_name(a.level) != level_name(b.level)) return false;
    if (a.parent.has_value() != b.parent.has_value()) return false;
    if (a.parent && *a.parent != *b.parent) return false;
    if (content_text(a) != content_text(b)) return false;
    if (a.content.index() != b.content.index()) return false;
    const auto& ma = a.metadata;
    const auto& mb = b.metadata;
    return ma.source_id == mb.source_id && ma.uri == mb.uri && ma.offsets == mb.offsets &&
           ma.schema == mb.schema && ma.time == mb.time && ma.source_type == mb.source_type &&
           ma.lang == mb.lang && ma.source_version == mb.source_version;
}

}  // namespace

TEST_CASE("serialize/deserialize round trip") {
    SUBCASE("empty Hseq") {
        auto bytes = serialize(Hseq{});
        CHECK(bytes.empty());
        CHECK(deserialize(bytes).empty());
    }

    SUBCASE("3-segment text Hseq is field-identical") {
        auto h = test::paragraphs_hseq({"First paragraph.", "Second one."});
        auto bytes = serialize(h);
        auto back = deserialize(bytes);
        REQUIRE(back.size() == h.size());
        for (size_t i = 0; i < h.size(); ++i) {
            CHECK(deep_equal(h.segments()[i], back.segments()[i]));
        }
        CHECK(back == h);
    }

    SUBCASE("serialization is byte-deterministic") {
        auto h = test::paragraphs_hseq({"Alpha beta.", "Gamma delta?"});
        CHECK(serialize(h) == serialize(h));
    }

    SUBCASE("optionals are omitted, not null-filled") {
        auto h = test::paragraphs_hseq({"One."});
        auto bytes = serialize(h);
        CHECK(bytes.find("null") == std::string::npos);
        CHECK(bytes.find("schema") == std::string::npos);
        CHECK(bytes.find("lang") == std::string::npos);
    }
}

TEST_CASE("deserialize rejects unknown level tags with line position") {
    std::string line =
        R"({"id":"x","level":"chapter","content":"y","metadata":{"source_id":"s","uri":"u","offsets":[0,1],"source_type":"text"}})";
    try {
        deserialize(line);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_no == 1);
        CHECK(std::string(e.what()).find("chapter") != std::string::npos);
    }
}

TEST_CASE("deserialize rejects dangling parents and malformed lines") {
    std::string dangling =
        R"({"id":"p","level":"paragraph","parent":"ghost","content":"y","metadata":{"source_id":"s","uri":"u","offsets":[0,1],"source_type":"text"}})";
    CHECK_THROWS_AS(deserialize(dangling), ParseError);
    CHECK_THROWS_AS(deserialize("not json at all"), ParseError);

    std::string ok =
        R"({"id":"d","level":"document","content":"","metadata":{"source_id":"s","uri":"u","offsets":[0,0],"source_type":"text"}})";
    std::string second_bad = ok + "\n{broken";
    try {
        deserialize(second_bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_no == 2);
    }
}

TEST_CASE("valid Hseqs form a forest rooted at container levels") {
    auto h = test::paragraphs_hseq({"A b.", "C d."});
    REQUIRE(validate(h).empty());
    for (const auto& seg : h.segments()) {
        if (!seg.parent) {
            bool root_level = seg.level == LevelTag::document || seg.level == LevelTag::table ||
                              seg.level == LevelTag::kg_subgraph;
            CHECK(root_level);
        } else {
            auto parent_pos = h.position(*seg.parent);
            REQUIRE(parent_pos.has_value());
            CHECK(*parent_pos < *h.position(seg.id));
        }
    }
}

TEST_CASE("make_segment_id is deterministic and level-prefixed") {
    auto id1 = make_segment_id("u", LevelTag::paragraph, {0, 9});
    auto id2 = make_segment_id("u", LevelTag::paragraph, {0, 9});
    CHECK(id1 == id2);
    CHECK(id1.rfind("p_", 0) == 0);
    CHECK(id1.size() == 2 + 8);
    CHECK(make_segment_id("u", LevelTag::paragraph, {0, 10}) != id1);
    CHECK(make_segment_id("u", LevelTag::sentence, {0, 9}).rfind("s_", 0) == 0);
}
