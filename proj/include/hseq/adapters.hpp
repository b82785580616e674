#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hseq/model.hpp"

namespace hseq {

struct TextSource {
    std::string source_id;
    std::string uri;
    std::string body;

    bool operator==(const TextSource&) const = default;
};

struct TableSource {
    std::string source_id;
    std::string uri;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    bool operator==(const TableSource&) const = default;
};

struct KgEdge {
    std::string head;
    std::string relation;
    std::string tail;
    std::optional<std::string> time;

    bool operator==(const KgEdge&) const = default;
    bool operator<(const KgEdge& other) const {
        return std::tie(head, relation, tail, time) <
               std::tie(other.head, other.relation, other.tail, other.time);
    }
};

struct Corpus {
    std::vector<TextSource> texts;
    std::vector<TableSource> tables;
    std::vector<KgEdge> kg_edges;  // multiset; multiplicities matter
    std::string kg_source_id = "kg";
    std::string kg_uri = "kg";

    bool empty() const { return texts.empty() && tables.empty() && kg_edges.empty(); }
};

// Text encoder: document root, one paragraph per "\n\n" block, sentences split
// on ./?/! followed by whitespace or end of paragraph. Offsets are absolute
// byte ranges into body and content equals the exact substring.
std::vector<Segment> encode_text(const std::string& source_id, const std::string& uri,
                                 const std::string& body);

// Table encoder: table root carries the header in metadata.schema; one
// table_row per row with offsets [i,-1]. Cell segments only when emit_cells.
// Throws std::invalid_argument on ragged rows or duplicate column names.
std::vector<Segment> encode_table(const TableSource& table, bool emit_cells = false);

// KG encoder: one kg_subgraph root per head entity (first-appearance order),
// exactly one triplet segment per edge, multiplicities preserved.
// Throws std::invalid_argument on an empty head/relation/tail.
std::vector<Segment> encode_kg(const std::string& source_id, const std::string& uri,
                               const std::vector<KgEdge>& edges);

// Full corpus encoder: texts, then tables, then KG, each in input order.
Hseq encode(const Corpus& corpus);

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inverse of encode, up to the benign equivalence below. Requires validate(h)
// to be empty. Throws DecodeError on conflicting text overlaps or row index gaps.
Corpus decode(const Hseq& h);

// Benign equivalence: texts match on non-whitespace characters, tables match
// under one global column permutation per table, KGs match as edge multisets.
bool equivalent(const Corpus& a, const Corpus& b);

}  // namespace hseq
