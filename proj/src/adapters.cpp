#include "hseq/adapters.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "hseq/text_util.hpp"

namespace hseq {

namespace {

struct Span {
    size_t begin;
    size_t end;
};

// Blocks delimited by the exact two-character sequence "\n\n". Empty blocks
// (which contain only delimiter newlines) are dropped.
std::vector<Span> split_paragraphs(const std::string& body) {
    std::vector<Span> spans;
    size_t pos = 0;
    while (pos <= body.size()) {
        size_t next = body.find("\n\n", pos);
        size_t end = (next == std::string::npos) ? body.size() : next;
        if (end > pos) spans.push_back({pos, end});
        if (next == std::string::npos) break;
        pos = next + 2;
    }
    return spans;
}

bool is_ascii_space(char ch) {
    return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
}

// Sentence boundaries: '.', '?', '!' followed by whitespace or end of the
// paragraph; the terminator stays with the sentence.
std::vector<Span> split_sentences(const std::string& body, Span paragraph) {
    std::vector<Span> spans;
    size_t start = paragraph.begin;
    size_t i = paragraph.begin;
    while (i < paragraph.end) {
        char ch = body[i];
        bool terminator = (ch == '.' || ch == '?' || ch == '!');
        bool at_boundary =
            terminator && (i + 1 == paragraph.end || is_ascii_space(body[i + 1]));
        if (!at_boundary) {
            ++i;
            continue;
        }
        spans.push_back({start, i + 1});
        start = i + 1;
        while (start < paragraph.end && is_ascii_space(body[start])) ++start;
        i = start;
    }
    if (start < paragraph.end) spans.push_back({start, paragraph.end});
    return spans;
}

Metadata text_meta(const std::string& source_id, const std::string& uri, Offsets offsets) {
    Metadata m;
    m.source_id = source_id;
    m.uri = uri;
    m.offsets = offsets;
    m.source_type = SourceType::text;
    return m;
}

}  // namespace

std::vector<Segment> encode_text(const std::string& source_id, const std::string& uri,
                                 const std::string& body) {
    std::vector<Segment> out;
    Offsets doc_offsets{0, static_cast<long long>(body.size())};
    Segment doc;
    doc.id = make_segment_id(uri, LevelTag::document, doc_offsets);
    doc.level = LevelTag::document;
    doc.content = std::string();
    doc.metadata = text_meta(source_id, uri, doc_offsets);
    out.push_back(doc);

    for (const Span& para : split_paragraphs(body)) {
        Offsets po{static_cast<long long>(para.begin), static_cast<long long>(para.end)};
        Segment p;
        p.id = make_segment_id(uri, LevelTag::paragraph, po);
        p.level = LevelTag::paragraph;
        p.parent = doc.id;
        p.content = body.substr(para.begin, para.end - para.begin);
        p.metadata = text_meta(source_id, uri, po);
        out.push_back(p);

        for (const Span& sent : split_sentences(body, para)) {
            Offsets so{static_cast<long long>(sent.begin), static_cast<long long>(sent.end)};
            Segment s;
            s.id = make_segment_id(uri, LevelTag::sentence, so);
            s.level = LevelTag::sentence;
            s.parent = p.id;
            s.content = body.substr(sent.begin, sent.end - sent.begin);
            s.metadata = text_meta(source_id, uri, so);
            out.push_back(s);
        }
    }
    return out;
}

std::vector<Segment> encode_table(const TableSource& table, bool emit_cells) {
    for (size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() != table.header.size()) {
            throw std::invalid_argument("table '" + table.uri + "' row " + std::to_string(i) +
                                        ": expected " + std::to_string(table.header.size()) +
                                        " values, got " + std::to_string(table.rows[i].size()));
        }
    }
    for (size_t i = 0; i < table.header.size(); ++i) {
        for (size_t j = i + 1; j < table.header.size(); ++j) {
            if (table.header[i] == table.header[j]) {
                throw std::invalid_argument("table '" + table.uri + "': duplicate column name '" +
                                            table.header[i] + "'");
            }
        }
    }

    std::vector<Segment> out;
    Segment root;
    root.id = make_segment_id(table.uri, LevelTag::table, {-1, -1});
    root.level = LevelTag::table;
    root.content = std::string();
    root.metadata.source_id = table.source_id;
    root.metadata.uri = table.uri;
    root.metadata.offsets = {-1, -1};
    root.metadata.schema = table.header;
    root.metadata.source_type = SourceType::table;
    out.push_back(root);

    for (size_t i = 0; i < table.rows.size(); ++i) {
        Offsets ro{static_cast<long long>(i), -1};
        Segment row;
        row.id = make_segment_id(table.uri, LevelTag::table_row, ro);
        row.level = LevelTag::table_row;
        row.parent = root.id;
        RowContent mapping;
        for (size_t c = 0; c < table.header.size(); ++c) {
            mapping.emplace_back(table.header[c], table.rows[i][c]);
        }
        row.content = std::move(mapping);
        row.metadata.source_id = table.source_id;
        row.metadata.uri = table.uri;
        row.metadata.offsets = ro;
        row.metadata.source_type = SourceType::table;
        const std::string row_id = row.id;
        out.push_back(std::move(row));

        if (emit_cells) {
            for (size_t c = 0; c < table.header.size(); ++c) {
                Offsets co{static_cast<long long>(i), static_cast<long long>(c)};
                Segment cell;
                cell.id = make_segment_id(table.uri, LevelTag::table_cell, co);
                cell.level = LevelTag::table_cell;
                cell.parent = row_id;
                cell.content = table.rows[i][c];
                cell.metadata.source_id = table.source_id;
                cell.metadata.uri = table.uri;
                cell.metadata.offsets = co;
                cell.metadata.source_type = SourceType::table;
                out.push_back(cell);
            }
        }
    }
    return out;
}

std::vector<Segment> encode_kg(const std::string& source_id, const std::string& uri,
                               const std::vector<KgEdge>& edges) {
    for (size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].head.empty() || edges[i].relation.empty() || edges[i].tail.empty()) {
            throw std::invalid_argument("kg edge " + std::to_string(i) +
                                        ": head/relation/tail must be nonempty");
        }
    }

    std::vector<Segment> out;
    // One subgraph root per head entity, in first-appearance order. The digest
    // input carries the head entity since offsets are constant for KG levels.
    std::map<std::string, std::string> root_ids;
    std::vector<std::string> head_order;
    for (const auto& edge : edges) {
        if (!root_ids.count(edge.head)) {
            root_ids[edge.head] = make_segment_id(uri, LevelTag::kg_subgraph, {-1, -1}, edge.head);
            head_order.push_back(edge.head);
        }
    }
    for (const auto& head : head_order) {
        Segment root;
        root.id = root_ids[head];
        root.level = LevelTag::kg_subgraph;
        root.content = head;
        root.metadata.source_id = source_id;
        root.metadata.uri = uri;
        root.metadata.offsets = {-1, -1};
        root.metadata.source_type = SourceType::kg;
        out.push_back(root);
    }

    // Occurrence ordinal keeps ids unique across duplicate edges.
    std::map<std::string, int> occurrence;
    for (const auto& edge : edges) {
        std::string key = edge.head + "\x1f" + edge.relation + "\x1f" + edge.tail + "\x1f" +
                          edge.time.value_or("");
        int ordinal = occurrence[key]++;
        Segment t;
        t.id = make_segment_id(uri, LevelTag::triplet, {-1, -1},
                               key + "\x1f" + std::to_string(ordinal));
        t.level = LevelTag::triplet;
        t.parent = root_ids[edge.head];
        t.content = TripleContent{edge.head, edge.relation, edge.tail};
        t.metadata.source_id = source_id;
        t.metadata.uri = uri;
        t.metadata.offsets = {-1, -1};
        t.metadata.source_type = SourceType::kg;
        t.metadata.time = edge.time;
        out.push_back(t);
    }
    return out;
}

Hseq encode(const Corpus& corpus) {
    std::vector<Segment> all;
    for (const auto& text : corpus.texts) {
        auto segs = encode_text(text.source_id, text.uri, text.body);
        all.insert(all.end(), segs.begin(), segs.end());
    }
    for (const auto& table : corpus.tables) {
        auto segs = encode_table(table);
        all.insert(all.end(), segs.begin(), segs.end());
    }
    if (!corpus.kg_edges.empty()) {
        auto segs = encode_kg(corpus.kg_source_id, corpus.kg_uri, corpus.kg_edges);
        all.insert(all.end(), segs.begin(), segs.end());
    }
    return Hseq(std::move(all));
}

namespace {

std::string decode_text_body(const Hseq& h, const Segment& root) {
    size_t len = static_cast<size_t>(root.metadata.offsets.second);
    std::string body(len, '\n');
    std::vector<bool> written(len, false);
    for (const auto& seg : h.segments()) {
        if (seg.level != LevelTag::paragraph || seg.parent != std::optional(root.id)) continue;
        const auto& text = std::get<std::string>(seg.content);
        auto [a, b] = seg.metadata.offsets;
        if (a < 0 || b < a || static_cast<size_t>(b) > len) {
            throw DecodeError("paragraph '" + seg.id + "' offsets out of range");
        }
        for (long long i = a; i < b; ++i) {
            char ch = text[static_cast<size_t>(i - a)];
            if (written[static_cast<size_t>(i)] && body[static_cast<size_t>(i)] != ch) {
                throw DecodeError("overlapping text offsets disagree at position " +
                                  std::to_string(i) + " in '" + root.metadata.uri + "'");
            }
            body[static_cast<size_t>(i)] = ch;
            written[static_cast<size_t>(i)] = true;
        }
    }
    return body;
}

TableSource decode_table(const Hseq& h, const Segment& root) {
    TableSource table;
    table.source_id = root.metadata.source_id;
    table.uri = root.metadata.uri;
    table.header = root.metadata.schema.value_or(std::vector<std::string>{});

    std::vector<const Segment*> rows;
    for (const auto& seg : h.segments()) {
        if (seg.level == LevelTag::table_row && seg.parent == std::optional(root.id)) {
            rows.push_back(&seg);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Segment* a, const Segment* b) {
        return a->metadata.offsets.first < b->metadata.offsets.first;
    });
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]->metadata.offsets.first != static_cast<long long>(i)) {
            throw DecodeError("table '" + table.uri + "': row index gap at " + std::to_string(i));
        }
        const auto& mapping = std::get<RowContent>(rows[i]->content);
        std::vector<std::string> values;
        for (const auto& col : table.header) {
            auto it = std::find_if(mapping.begin(), mapping.end(),
                                   [&](const auto& kv) { return kv.first == col; });
            if (it == mapping.end()) {
                throw DecodeError("table '" + table.uri + "' row " + std::to_string(i) +
                                  ": missing column '" + col + "'");
            }
            values.push_back(it->second);
        }
        table.rows.push_back(std::move(values));
    }
    return table;
}

}  // namespace

Corpus decode(const Hseq& h) {
    if (!validate(h).empty()) {
        throw DecodeError("decode requires a valid Hseq");
    }
    Corpus corpus;
    corpus.kg_edges.clear();
    for (const auto& seg : h.segments()) {
        switch (seg.level) {
            case LevelTag::document:
                corpus.texts.push_back(
                    {seg.metadata.source_id, seg.metadata.uri, decode_text_body(h, seg)});
                break;
            case LevelTag::table:
                corpus.tables.push_back(decode_table(h, seg));
                break;
            case LevelTag::triplet: {
                const auto& t = std::get<TripleContent>(seg.content);
                corpus.kg_edges.push_back({t.head, t.relation, t.tail, seg.metadata.time});
                corpus.kg_source_id = seg.metadata.source_id;
                corpus.kg_uri = seg.metadata.uri;
                break;
            }
            default:
                break;
        }
    }
    return corpus;
}

namespace {

using Column = std::vector<std::string>;  // header name followed by cell values

std::vector<Column> table_columns(const TableSource& t) {
    std::vector<Column> cols(t.header.size());
    for (size_t c = 0; c < t.header.size(); ++c) {
        cols[c].push_back(t.header[c]);
        for (const auto& row : t.rows) cols[c].push_back(row[c]);
    }
    return cols;
}

bool tables_equivalent(const TableSource& a, const TableSource& b) {
    size_t cols = a.header.size();
    if (cols != b.header.size() || a.rows.size() != b.rows.size()) return false;
    if (cols == 0) return true;

    if (cols <= 8) {
        // Exact search: does some permutation of a's columns reproduce b?
        std::vector<size_t> perm(cols);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            bool match = true;
            for (size_t j = 0; j < cols && match; ++j) {
                if (a.header[perm[j]] != b.header[j]) match = false;
            }
            for (size_t i = 0; i < a.rows.size() && match; ++i) {
                for (size_t j = 0; j < cols && match; ++j) {
                    if (a.rows[i][perm[j]] != b.rows[i][j]) match = false;
                }
            }
            if (match) return true;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return false;
    }

    // Wide-table fallback: multiset-of-columns comparison.
    auto ca = table_columns(a);
    auto cb = table_columns(b);
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    return ca == cb;
}

}  // namespace

bool equivalent(const Corpus& a, const Corpus& b) {
    if (a.texts.size() != b.texts.size() || a.tables.size() != b.tables.size() ||
        a.kg_edges.size() != b.kg_edges.size()) {
        return false;
    }
    for (size_t i = 0; i < a.texts.size(); ++i) {
        if (strip_whitespace(a.texts[i].body) != strip_whitespace(b.texts[i].body)) return false;
    }
    for (size_t i = 0; i < a.tables.size(); ++i) {
        if (!tables_equivalent(a.tables[i], b.tables[i])) return false;
    }
    auto ea = a.kg_edges;
    auto eb = b.kg_edges;
    std::sort(ea.begin(), ea.end());
    std::sort(eb.begin(), eb.end());
    return ea == eb;
}

}  // namespace hseq
