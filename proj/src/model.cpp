#include "hseq/model.hpp"

#include <array>

#include "hseq/sha1.hpp"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 8> kLevelNames = {
    "document", "paragraph", "sentence", "table",
    "table_row", "table_cell", "kg_subgraph", "triplet",
};

constexpr std::array<std::string_view, 3> kSourceTypeNames = {"text", "table", "kg"};

const char* id_prefix(LevelTag level) {
    switch (level) {
        case LevelTag::document: return "d";
        case LevelTag::paragraph: return "p";
        case LevelTag::sentence: return "s";
        case LevelTag::table: return "t";
        case LevelTag::table_row: return "row";
        case LevelTag::table_cell: return "cell";
        case LevelTag::kg_subgraph: return "kg";
        case LevelTag::triplet: return "tr";
    }
    return "x";
}

bool is_text_level(LevelTag level) {
    return level == LevelTag::document || level == LevelTag::paragraph ||
           level == LevelTag::sentence;
}

bool is_kg_level(LevelTag level) {
    return level == LevelTag::kg_subgraph || level == LevelTag::triplet;
}

}  // namespace

std::string_view level_name(LevelTag level) {
    return kLevelNames[static_cast<size_t>(level)];
}

std::optional<LevelTag> level_from_name(std::string_view name) {
    for (size_t i = 0; i < kLevelNames.size(); ++i) {
        if (kLevelNames[i] == name) return static_cast<LevelTag>(i);
    }
    return std::nullopt;
}

std::string_view source_type_name(SourceType st) {
    return kSourceTypeNames[static_cast<size_t>(st)];
}

std::optional<SourceType> source_type_from_name(std::string_view name) {
    for (size_t i = 0; i < kSourceTypeNames.size(); ++i) {
        if (kSourceTypeNames[i] == name) return static_cast<SourceType>(i);
    }
    return std::nullopt;
}

std::string content_text(const Segment& seg) {
    if (const auto* text = std::get_if<std::string>(&seg.content)) {
        return *text;
    }
    if (const auto* row = std::get_if<RowContent>(&seg.content)) {
        std::string out;
        for (size_t i = 0; i < row->size(); ++i) {
            if (i > 0) out += "; ";
            out += (*row)[i].first + ": " + (*row)[i].second;
        }
        return out;
    }
    const auto& triple = std::get<TripleContent>(seg.content);
    return triple.head + " " + triple.relation + " " + triple.tail;
}

Hseq::Hseq(std::vector<Segment> segments) : segments_(std::move(segments)) {
    index_.reserve(segments_.size());
    for (size_t i = 0; i < segments_.size(); ++i) {
        index_.emplace(segments_[i].id, i);  // keeps first occurrence
    }
}

std::optional<size_t> Hseq::position(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Segment* Hseq::find(std::string_view id) const {
    auto pos = position(id);
    return pos ? &segments_[*pos] : nullptr;
}

ValidationReport validate(const Hseq& h) {
    ValidationReport report;
    std::unordered_map<std::string, size_t> seen;
    const auto& segs = h.segments();

    for (size_t i = 0; i < segs.size(); ++i) {
        const Segment& s = segs[i];
        if (s.id.empty()) {
            report.push_back({s.id, "empty-id", "segment at position " + std::to_string(i)});
        } else if (auto it = seen.find(s.id); it != seen.end()) {
            report.push_back({s.id, "duplicate-id",
                              "also appears at position " + std::to_string(it->second)});
        } else {
            seen.emplace(s.id, i);
        }

        if (s.parent) {
            auto it = seen.find(*s.parent);
            if (it == seen.end()) {
                // Either missing entirely or only appears later in the sequence.
                bool exists_later = false;
                for (size_t j = i + 1; j < segs.size(); ++j) {
                    if (segs[j].id == *s.parent) {
                        exists_later = true;
                        break;
                    }
                }
                report.push_back({s.id,
                                  exists_later ? "parent-before-child" : "dangling-parent",
                                  "parent '" + *s.parent + "'"});
            }
        }

        if (is_text_level(s.level)) {
            if (s.metadata.offsets.first < 0 ||
                s.metadata.offsets.first > s.metadata.offsets.second) {
                report.push_back({s.id, "offsets-order",
                                  "[" + std::to_string(s.metadata.offsets.first) + "," +
                                      std::to_string(s.metadata.offsets.second) + "]"});
            }
        }
        if (is_kg_level(s.level) &&
            s.metadata.offsets != Offsets{-1, -1}) {
            report.push_back({s.id, "kg-offsets", "expected (-1,-1)"});
        }

        bool has_schema = s.metadata.schema.has_value();
        if (has_schema != (s.level == LevelTag::table)) {
            report.push_back({s.id, "schema-placement",
                              has_schema ? "schema on non-table level" : "table root lacks schema"});
        }

        if (s.level == LevelTag::triplet) {
            const auto* triple = std::get_if<TripleContent>(&s.content);
            if (!triple || triple->head.empty() || triple->relation.empty() ||
                triple->tail.empty()) {
                report.push_back({s.id, "triplet-content", "needs three nonempty components"});
            }
        } else if (s.level == LevelTag::table_row) {
            if (!std::holds_alternative<RowContent>(s.content)) {
                report.push_back({s.id, "content-kind", "table_row needs a name/value mapping"});
            }
        } else {
            if (!std::holds_alternative<std::string>(s.content)) {
                report.push_back({s.id, "content-kind",
                                  std::string(level_name(s.level)) + " needs string content"});
            }
        }
    }
    return report;
}

int rho_level_rank(LevelTag level) {
    switch (level) {
        case LevelTag::paragraph: return 0;
        case LevelTag::table_row: return 1;
        case LevelTag::sentence: return 2;
        case LevelTag::triplet: return 3;
        default: return 4;  // roots and cells never enter candidate streams
    }
}

bool is_candidate_level(LevelTag level) {
    return rho_level_rank(level) < 4;
}

int rho_compare(const Segment& a, const Segment& b) {
    int ra = rho_level_rank(a.level);
    int rb = rho_level_rank(b.level);
    if (ra != rb) return ra < rb ? -1 : 1;
    if (a.metadata.uri != b.metadata.uri) return a.metadata.uri < b.metadata.uri ? -1 : 1;
    if (a.metadata.offsets != b.metadata.offsets)
        return a.metadata.offsets < b.metadata.offsets ? -1 : 1;
    if (a.id != b.id) return a.id < b.id ? -1 : 1;
    return 0;
}

namespace {

ordered_json content_to_json(const Content& content) {
    if (const auto* text = std::get_if<std::string>(&content)) {
        return *text;
    }
    if (const auto* row = std::get_if<RowContent>(&content)) {
        ordered_json obj = ordered_json::object();
        for (const auto& [name, value] : *row) obj[name] = value;
        return obj;
    }
    const auto& triple = std::get<TripleContent>(content);
    return ordered_json::array({triple.head, triple.relation, triple.tail});
}

Content content_from_json(const ordered_json& j, size_t line_no) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_object()) {
        RowContent row;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!it.value().is_string())
                throw ParseError(line_no, "row value for '" + it.key() + "' must be a string");
            row.emplace_back(it.key(), it.value().get<std::string>());
        }
        return row;
    }
    if (j.is_array()) {
        if (j.size() != 3)
            throw ParseError(line_no, "triple content must have exactly 3 components");
        for (const auto& part : j) {
            if (!part.is_string())
                throw ParseError(line_no, "triple components must be strings");
        }
        return TripleContent{j[0].get<std::string>(), j[1].get<std::string>(),
                             j[2].get<std::string>()};
    }
    throw ParseError(line_no, "content must be a string, object, or 3-array");
}

}  // namespace

std::string serialize_segment(const Segment& seg) {
    ordered_json j;
    j["id"] = seg.id;
    j["level"] = std::string(level_name(seg.level));
    if (seg.parent) j["parent"] = *seg.parent;
    j["content"] = content_to_json(seg.content);

    ordered_json meta;
    meta["source_id"] = seg.metadata.source_id;
    meta["uri"] = seg.metadata.uri;
    meta["offsets"] = ordered_json::array({seg.metadata.offsets.first, seg.metadata.offsets.second});
    if (seg.metadata.schema) meta["schema"] = *seg.metadata.schema;
    if (seg.metadata.time) meta["time"] = *seg.metadata.time;
    meta["source_type"] = std::string(source_type_name(seg.metadata.source_type));
    if (seg.metadata.lang) meta["lang"] = *seg.metadata.lang;
    if (seg.metadata.source_version) meta["source_version"] = *seg.metadata.source_version;
    j["metadata"] = std::move(meta);
    return j.dump();
}

Segment parse_segment_line(std::string_view line, size_t line_no) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record must be an object");

    Segment seg;
    try {
        seg.id = j.at("id").get<std::string>();
        std::string level = j.at("level").get<std::string>();
        auto tag = level_from_name(level);
        if (!tag) throw ParseError(line_no, "unknown level tag '" + level + "'");
        seg.level = *tag;
        if (j.contains("parent")) seg.parent = j["parent"].get<std::string>();
        seg.content = content_from_json(j.at("content"), line_no);

        const auto& meta = j.at("metadata");
        seg.metadata.source_id = meta.at("source_id").get<std::string>();
        seg.metadata.uri = meta.at("uri").get<std::string>();
        const auto& off = meta.at("offsets");
        if (!off.is_array() || off.size() != 2)
            throw ParseError(line_no, "offsets must be a pair");
        seg.metadata.offsets = {off[0].get<long long>(), off[1].get<long long>()};
        if (meta.contains("schema"))
            seg.metadata.schema = meta["schema"].get<std::vector<std::string>>();
        if (meta.contains("time")) seg.metadata.time = meta["time"].get<std::string>();
        std::string st = meta.at("source_type").get<std::string>();
        auto source_type = source_type_from_name(st);
        if (!source_type) throw ParseError(line_no, "unknown source_type '" + st + "'");
        seg.metadata.source_type = *source_type;
        if (meta.contains("lang")) seg.metadata.lang = meta["lang"].get<std::string>();
        if (meta.contains("source_version"))
            seg.metadata.source_version = meta["source_version"].get<std::string>();
    } catch (const ParseError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("bad record field: ") + e.what());
    }
    return seg;
}

std::string serialize(const Hseq& h) {
    auto report = validate(h);
    if (!report.empty()) {
        throw std::invalid_argument("serialize requires a valid Hseq; first violation: " +
                                    report.front().rule + " on '" + report.front().segment_id +
                                    "'");
    }
    std::string out;
    for (const auto& seg : h.segments()) {
        out += serialize_segment(seg);
        out += '\n';
    }
    return out;
}

Hseq deserialize(std::string_view bytes) {
    std::vector<Segment> segments;
    std::unordered_map<std::string, size_t> seen;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < bytes.size()) {
        size_t end = bytes.find('\n', pos);
        if (end == std::string_view::npos) end = bytes.size();
        std::string_view line = bytes.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        Segment seg = parse_segment_line(line, line_no);
        if (seg.parent && !seen.count(*seg.parent)) {
            throw ParseError(line_no, "dangling parent '" + *seg.parent + "' for '" + seg.id + "'");
        }
        seen.emplace(seg.id, segments.size());
        segments.push_back(std::move(seg));
    }
    return Hseq(std::move(segments));
}

std::string make_segment_id(std::string_view uri, LevelTag level, Offsets offsets,
                            std::string_view extra) {
    std::string data;
    data.reserve(uri.size() + 32 + extra.size());
    data.append(uri);
    data.push_back('\0');
    data.append(level_name(level));
    data.push_back('\0');
    data.append(std::to_string(offsets.first));
    data.push_back(':');
    data.append(std::to_string(offsets.second));
    if (!extra.empty()) {
        data.push_back('\0');
        data.append(extra);
    }
    return std::string(id_prefix(level)) + "_" + sha1_hex(data).substr(0, 8);
}

}  // namespace hseq
