#include "doctest.h"

#include <algorithm>

#include "hseq/adapters.hpp"
#include "test_helpers.hpp"

using namespace hseq;

namespace {

std::vector<const Segment*> of_level(const std::vector<Segment>& segs, LevelTag level) {
    std::vector<const Segment*> out;
    for (const auto& s : segs) {
        if (s.level == level) out.push_back(&s);
    }
    return out;
}

}  // namespace

TEST_CASE("encode_text: empty body yields the document root only") {
    auto segs = encode_text("s", "u", "");
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].level == LevelTag::document);
    CHECK(!segs[0].parent);
    CHECK(segs[0].metadata.offsets == Offsets{0, 0});
}

TEST_CASE("encode_text: single block, single sentence") {
    auto segs = encode_text("s", "u", "Hello world.");
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].level == LevelTag::document);
    CHECK(segs[1].level == LevelTag::paragraph);
    CHECK(segs[1].metadata.offsets == Offsets{0, 12});
    CHECK(std::get<std::string>(segs[1].content) == "Hello world.");
    CHECK(segs[2].level == LevelTag::sentence);
    CHECK(segs[2].metadata.offsets == Offsets{0, 12});
    CHECK(segs[2].parent == segs[1].id);
    CHECK(segs[1].parent == segs[0].id);
}

TEST_CASE("encode_text: offsets match an independent character scan") {
    // Scan pinned beforehand: paragraphs [0,9) and [11,15); sentences
    // [0,4), [5,9), [11,15).
    const std::string body = "A b. C d.\n\nE f.";
    auto segs = encode_text("s", "u", body);
    auto paras = of_level(segs, LevelTag::paragraph);
    auto sents = of_level(segs, LevelTag::sentence);
    REQUIRE(segs.size() == 1 + 2 + 3);
    REQUIRE(paras.size() == 2);
    REQUIRE(sents.size() == 3);
    CHECK(paras[0]->metadata.offsets == Offsets{0, 9});
    CHECK(paras[1]->metadata.offsets == Offsets{11, 15});
    CHECK(sents[0]->metadata.offsets == Offsets{0, 4});
    CHECK(sents[1]->metadata.offsets == Offsets{5, 9});
    CHECK(sents[2]->metadata.offsets == Offsets{11, 15});

    for (const Segment* seg : paras) {
        auto [a, b] = seg->metadata.offsets;
        CHECK(std::get<std::string>(seg->content) ==
              body.substr(static_cast<size_t>(a), static_cast<size_t>(b - a)));
    }
}

TEST_CASE("encode_table: zero rows gives table root only") {
    TableSource t{"s", "tbl://x", {"x"}, {}};
    auto segs = encode_table(t);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].level == LevelTag::table);
    REQUIRE(segs[0].metadata.schema.has_value());
    CHECK(*segs[0].metadata.schema == std::vector<std::string>{"x"});
}

TEST_CASE("encode_table: single row matches a hand-built segment") {
    TableSource t{"films", "tbl://films2004", {"name", "year"}, {{"Night Watch", "2004"}}};
    auto segs = encode_table(t);
    REQUIRE(segs.size() == 2);

    Segment expected;
    expected.id = make_segment_id("tbl://films2004", LevelTag::table_row, {0, -1});
    expected.level = LevelTag::table_row;
    expected.parent = segs[0].id;
    expected.content = RowContent{{"name", "Night Watch"}, {"year", "2004"}};
    expected.metadata.source_id = "films";
    expected.metadata.uri = "tbl://films2004";
    expected.metadata.offsets = {0, -1};
    expected.metadata.source_type = SourceType::table;
    CHECK(segs[1] == expected);
}

TEST_CASE("encode_table: row offsets follow original order") {
    TableSource t{"s", "tbl://x", {"c"}, {{"a"}, {"b"}, {"c"}}};
    auto segs = encode_table(t);
    REQUIRE(segs.size() == 4);
    CHECK(segs[1].metadata.offsets == Offsets{0, -1});
    CHECK(segs[2].metadata.offsets == Offsets{1, -1});
    CHECK(segs[3].metadata.offsets == Offsets{2, -1});
}

TEST_CASE("encode_table: ragged rows name the first offending index") {
    TableSource t{"s", "tbl://x", {"a", "b"}, {{"1", "2"}, {"only"}}};
    try {
        encode_table(t);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("encode_table: cells behind the flag") {
    TableSource t{"s", "tbl://x", {"a", "b"}, {{"1", "2"}}};
    auto segs = encode_table(t, true);
    REQUIRE(segs.size() == 4);
    CHECK(segs[2].level == LevelTag::table_cell);
    CHECK(segs[2].metadata.offsets == Offsets{0, 0});
    CHECK(segs[3].metadata.offsets == Offsets{0, 1});
    CHECK(segs[2].parent == segs[1].id);
    CHECK(validate(Hseq(segs)).empty());
}

TEST_CASE("encode_kg: empty edge set yields no segments") {
    CHECK(encode_kg("s", "kg://x", {}).empty());
}

TEST_CASE("encode_kg: single edge gives root plus triplet") {
    auto segs = encode_kg("s", "kg://x", {{"a", "likes", "b", std::nullopt}});
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].level == LevelTag::kg_subgraph);
    CHECK(segs[1].level == LevelTag::triplet);
    CHECK(std::get<TripleContent>(segs[1].content) == TripleContent{"a", "likes", "b"});
    CHECK(segs[1].parent == segs[0].id);
}

TEST_CASE("encode_kg: duplicate edges preserve multiplicity") {
    std::vector<KgEdge> edges = {{"a", "r", "b", std::nullopt}, {"a", "r", "b", std::nullopt}};
    auto segs = encode_kg("s", "kg://x", edges);
    auto triplets = of_level(segs, LevelTag::triplet);
    REQUIRE(triplets.size() == 2);
    CHECK(triplets[0]->id != triplets[1]->id);
    CHECK(validate(Hseq(segs)).empty());
}

TEST_CASE("encode_kg: empty fields are rejected") {
    CHECK_THROWS_AS(encode_kg("s", "kg://x", {{"", "r", "b", std::nullopt}}),
                    std::invalid_argument);
}

TEST_CASE("decode recovers the exact text") {
    const std::string body = "A b. C d.\n\nE f.";
    Corpus corpus;
    corpus.texts.push_back({"s", "text://0", body});
    Corpus back = decode(encode(corpus));
    REQUIRE(back.texts.size() == 1);
    CHECK(back.texts[0].body == body);
}

TEST_CASE("decode rebuilds the table matrix") {
    TableSource t{"s", "tbl://x", {"name", "year"}, {{"Night Watch", "2004"}, {"Arie", "2004"}}};
    Corpus corpus;
    corpus.tables.push_back(t);
    Corpus back = decode(encode(corpus));
    REQUIRE(back.tables.size() == 1);
    CHECK(back.tables[0].header == t.header);
    CHECK(back.tables[0].rows == t.rows);
}

TEST_CASE("decode of a KG is order-insensitive on triplets") {
    std::vector<KgEdge> edges = {{"a", "r1", "b", std::nullopt},
                                 {"c", "r2", "d", std::string("2004")},
                                 {"a", "r1", "b", std::nullopt}};
    auto segs = encode_kg("s", "kg://x", edges);
    // Move triplets around (roots stay first to keep parent-before-child).
    std::vector<Segment> shuffled;
    for (const auto& s : segs) {
        if (s.level == LevelTag::kg_subgraph) shuffled.push_back(s);
    }
    std::vector<Segment> triplets;
    for (const auto& s : segs) {
        if (s.level == LevelTag::triplet) triplets.push_back(s);
    }
    std::reverse(triplets.begin(), triplets.end());
    shuffled.insert(shuffled.end(), triplets.begin(), triplets.end());

    Corpus back = decode(Hseq(shuffled));
    auto sorted_in = edges;
    auto sorted_out = back.kg_edges;
    std::sort(sorted_in.begin(), sorted_in.end());
    std::sort(sorted_out.begin(), sorted_out.end());
    CHECK(sorted_in == sorted_out);
}

TEST_CASE("decode flags conflicting text overlaps and row gaps") {
    SUBCASE("overlap disagreement") {
        std::vector<Segment> segs;
        segs.push_back(test::text_segment("doc", LevelTag::document, "u", {0, 4}, ""));
        segs.push_back(
            test::text_segment("p0", LevelTag::paragraph, "u", {0, 4}, "abcd", std::string("doc")));
        segs.push_back(
            test::text_segment("p1", LevelTag::paragraph, "u", {2, 4}, "XY", std::string("doc")));
        CHECK_THROWS_AS(decode(Hseq(std::move(segs))), DecodeError);
    }
    SUBCASE("row index gap") {
        TableSource t{"s", "tbl://x", {"c"}, {{"a"}, {"b"}}};
        auto segs = encode_table(t);
        segs.erase(segs.begin() + 1);  // drop row 0
        CHECK_THROWS_AS(decode(Hseq(std::move(segs))), DecodeError);
    }
}

TEST_CASE("equivalent: reflexive on identical corpora") {
    test::CorpusGenerator gen(7);
    Corpus c = gen.corpus();
    CHECK(equivalent(c, c));
}

TEST_CASE("equivalent: consistent column permutation is benign") {
    Corpus a;
    a.tables.push_back({"s", "t", {"x", "y"}, {{"1", "2"}, {"3", "4"}}});
    Corpus b;
    b.tables.push_back({"s", "t", {"y", "x"}, {{"2", "1"}, {"4", "3"}}});
    CHECK(equivalent(a, b));
}

TEST_CASE("equivalent: header swapped without row swap is not benign") {
    // Brute-force over both 2-column permutations: identity mismatches the
    // header, the swap mismatches every row, so no permutation aligns.
    Corpus a;
    a.tables.push_back({"s", "t", {"x", "y"}, {{"1", "2"}}});
    Corpus b;
    b.tables.push_back({"s", "t", {"y", "x"}, {{"1", "2"}}});
    CHECK_FALSE(equivalent(a, b));
}

TEST_CASE("equivalent: whitespace-only text differences are benign") {
    Corpus a;
    a.texts.push_back({"s", "u", "A b.\n\nC d."});
    Corpus b;
    b.texts.push_back({"s", "u", "A  b.\nC d. "});
    CHECK(equivalent(a, b));

    Corpus c;
    c.texts.push_back({"s", "u", "A b X\n\nC d."});
    CHECK_FALSE(equivalent(a, c));
}

TEST_CASE("faithfulness: decode(encode(X)) is equivalent to X on random corpora") {
    for (uint64_t seed = 0; seed < 200; ++seed) {
        test::CorpusGenerator gen(seed);
        Corpus corpus = gen.corpus();
        Hseq h = encode(corpus);
        CAPTURE(seed);
        REQUIRE(validate(h).empty());
        CHECK(equivalent(decode(h), corpus));
    }
}

TEST_CASE("every text segment stores the exact substring at its offsets") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        test::CorpusGenerator gen(seed * 31 + 1);
        std::string body = gen.body();
        auto segs = encode_text("s", "u", body);
        for (const auto& seg : segs) {
            if (seg.level == LevelTag::document) continue;
            auto [a, b] = seg.metadata.offsets;
            CHECK(std::get<std::string>(seg.content) ==
                  body.substr(static_cast<size_t>(a), static_cast<size_t>(b - a)));
        }
    }
}

TEST_CASE("edge-triplet bijection holds with duplicates") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        test::CorpusGenerator gen(seed * 17 + 3);
        auto edges = gen.kg();
        auto segs = encode_kg("s", "kg://x", edges);
        std::vector<KgEdge> from_segments;
        for (const auto& s : segs) {
            if (s.level != LevelTag::triplet) continue;
            const auto& t = std::get<TripleContent>(s.content);
            from_segments.push_back({t.head, t.relation, t.tail, s.metadata.time});
        }
        auto sorted_in = edges;
        std::sort(sorted_in.begin(), sorted_in.end());
        std::sort(from_segments.begin(), from_segments.end());
        CHECK(sorted_in == from_segments);
    }
}

TEST_CASE("round trip through serialized bytes") {
    test::CorpusGenerator gen(12345);
    Corpus corpus = gen.corpus();
    Hseq h = encode(corpus);
    Hseq back = deserialize(serialize(h));
    CHECK(back == h);
    CHECK(equivalent(decode(back), corpus));
}
