#include "doctest.h"

#include <algorithm>
#include <random>

#include "hseq/adapters.hpp"
#include "hseq/canonicalize.hpp"
#include "test_helpers.hpp"

using namespace hseq;

TEST_CASE("evidence_id matches independently computed sha1 digests") {
    // Pinned via python hashlib over uri + NUL + "a:b".
    CHECK(evidence_id("u", {0, 1}) == "8379ded15f59206b294333d6dcf9afd0bf7141d4");
    CHECK(evidence_id("u", {0, 2}) == "0badff617db73ea76c77c951ac32722881e53507");
    CHECK(evidence_id("u", {0, 1}) == evidence_id("u", {0, 1}));
    CHECK(evidence_id("u", {0, 1}) != evidence_id("u", {0, 2}));
}

namespace {

Hseq mixed_fixture() {
    test::CorpusGenerator gen(2718);
    Corpus corpus;
    corpus.texts.push_back({"t0", "text://0", "Night Watch is a 2004 film. It is Russian."});
    corpus.texts.push_back({"t1", "text://1", "Another document.\n\nWith two paragraphs."});
    corpus.tables.push_back({"tbl", "tbl://films", {"name", "year"},
                             {{"Night Watch", "2004"}, {"Arie", "2004"}}});
    corpus.kg_edges = {{"night_watch", "directed_by", "bekmambetov", std::nullopt}};
    return encode(corpus);
}

std::vector<std::string> candidate_ids(const Hseq& h) {
    std::vector<std::string> ids;
    for (const auto& seg : h.segments()) {
        if (is_candidate_level(seg.level)) ids.push_back(seg.id);
    }
    return ids;
}

}  // namespace

TEST_CASE("canonicalize: empty selection gives an empty package") {
    Hseq h = mixed_fixture();
    auto pkg = canonicalize({}, h, "q");
    CHECK(pkg.items.empty());
    CHECK(pkg.question == "q");
}

TEST_CASE("canonicalize: identical (uri, offsets) collapse to one item") {
    std::vector<Segment> segs;
    segs.push_back(test::text_segment("doc", LevelTag::document, "u", {0, 10}, ""));
    segs.push_back(
        test::text_segment("p0", LevelTag::paragraph, "u", {0, 10}, "same span", std::string("doc")));
    segs.push_back(
        test::text_segment("s0", LevelTag::sentence, "u", {0, 10}, "same span", std::string("p0")));
    Hseq h(std::move(segs));
    auto pkg = canonicalize({"p0", "s0"}, h, "q");
    REQUIRE(pkg.items.size() == 1);
    // rho-earliest wins: paragraph ranks before sentence.
    CHECK(pkg.items[0].level == LevelTag::paragraph);
}

TEST_CASE("canonicalize: package bytes are invariant to selection order") {
    Hseq h = mixed_fixture();
    auto ids = candidate_ids(h);
    REQUIRE(ids.size() >= 5);
    ids.resize(5);

    std::string reference = serialize_package(canonicalize(ids, h, "q", "ep"));
    std::mt19937_64 rng(5);
    for (int perm = 0; perm < 20; ++perm) {
        std::shuffle(ids.begin(), ids.end(), rng);
        CHECK(serialize_package(canonicalize(ids, h, "q", "ep")) == reference);
    }
}

TEST_CASE("canonicalize: items are sorted by uri then offsets") {
    Hseq h = mixed_fixture();
    auto pkg = canonicalize(candidate_ids(h), h, "q");
    for (size_t i = 1; i < pkg.items.size(); ++i) {
        const auto& prev = pkg.items[i - 1];
        const auto& cur = pkg.items[i];
        bool ordered = prev.uri < cur.uri ||
                       (prev.uri == cur.uri && prev.offsets < cur.offsets);
        CHECK(ordered);
    }
}

TEST_CASE("canonicalize: unresolved id raises an error naming it") {
    Hseq h = mixed_fixture();
    try {
        canonicalize({"ghost_42"}, h, "q");
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("ghost_42") != std::string::npos);
    }
}

TEST_CASE("verify_content_preserving holds for canonicalize output") {
    Hseq h = mixed_fixture();
    auto pkg = canonicalize(candidate_ids(h), h, "q");
    CHECK(verify_content_preserving(pkg, h));
}

TEST_CASE("verify_content_preserving rejects a tampered snippet") {
    Hseq h = mixed_fixture();
    auto ids = candidate_ids(h);
    ids.resize(3);
    auto pkg = canonicalize(ids, h, "q");
    REQUIRE(!pkg.items.empty());
    pkg.items[0].snippet += " (tampered)";
    CHECK_FALSE(verify_content_preserving(pkg, h));
}

TEST_CASE("verify_content_preserving rejects unresolvable provenance") {
    Hseq h = mixed_fixture();
    auto pkg = canonicalize(candidate_ids(h), h, "q");
    REQUIRE(!pkg.items.empty());
    pkg.items[0].uri = "nowhere://";
    pkg.items[0].id = evidence_id("nowhere://", pkg.items[0].offsets);
    CHECK_FALSE(verify_content_preserving(pkg, h));
}

TEST_CASE("canonicalize is idempotent through provenance") {
    Hseq h = mixed_fixture();
    auto ids = candidate_ids(h);
    ids.resize(4);
    auto pkg = canonicalize(ids, h, "q", "ep");

    // Map items back to segments via provenance (uri, offsets, level), then
    // re-canonicalize. Level disambiguates full-span paragraph/sentence pairs.
    std::vector<std::string> recovered;
    for (const auto& item : pkg.items) {
        for (const auto& seg : h.segments()) {
            if (seg.metadata.uri == item.uri && seg.metadata.offsets == item.offsets &&
                seg.level == item.level) {
                recovered.push_back(seg.id);
                break;
            }
        }
    }
    auto pkg2 = canonicalize(recovered, h, "q", "ep");
    CHECK(serialize_package(pkg2) == serialize_package(pkg));
}

TEST_CASE("soundness property over random selections") {
    Hseq h = mixed_fixture();
    auto ids = candidate_ids(h);
    std::mt19937_64 rng(77);
    for (int round = 0; round < 100; ++round) {
        std::shuffle(ids.begin(), ids.end(), rng);
        size_t take = rng() % (ids.size() + 1);
        std::vector<std::string> selection(ids.begin(), ids.begin() + take);
        auto pkg = canonicalize(selection, h, "q");
        CAPTURE(round);
        CHECK(verify_content_preserving(pkg, h));
    }
}

TEST_CASE("package serialization round-trips") {
    Hseq h = mixed_fixture();
    auto pkg = canonicalize(candidate_ids(h), h, "the question", "ep1");
    auto back = parse_package(serialize_package(pkg));
    CHECK(back == pkg);
}

TEST_CASE("row snippets render in schema order; triples as h r t") {
    Hseq h = mixed_fixture();
    auto pkg = canonicalize(candidate_ids(h), h, "q");
    bool saw_row = false;
    bool saw_triple = false;
    for (const auto& item : pkg.items) {
        if (item.level == LevelTag::table_row && item.offsets.first == 0) {
            CHECK(item.snippet == "name: Night Watch; year: 2004");
            saw_row = true;
        }
        if (item.level == LevelTag::triplet) {
            CHECK(item.snippet == "night_watch directed_by bekmambetov");
            saw_triple = true;
        }
    }
    CHECK(saw_row);
    CHECK(saw_triple);
}
