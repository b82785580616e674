#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace hseq {

// Granularity marker of a segment. Unknown tags are rejected at parse time.
enum class LevelTag {
    document,
    paragraph,
    sentence,
    table,
    table_row,
    table_cell,
    kg_subgraph,
    triplet,
};

enum class SourceType { text, table, kg };

std::string_view level_name(LevelTag level);
std::optional<LevelTag> level_from_name(std::string_view name);
std::string_view source_type_name(SourceType st);
std::optional<SourceType> source_type_from_name(std::string_view name);

// Half-open character range for text levels, [row,-1] for table rows,
// [row,col] for cells, (-1,-1) for KG levels.
using Offsets = std::pair<long long, long long>;

struct Metadata {
    std::string source_id;
    std::string uri;
    Offsets offsets{0, 0};
    std::optional<std::vector<std::string>> schema;  // table roots only
    std::optional<std::string> time;
    SourceType source_type = SourceType::text;
    std::optional<std::string> lang;
    std::optional<std::string> source_version;

    bool operator==(const Metadata&) const = default;
};

struct TripleContent {
    std::string head;
    std::string relation;
    std::string tail;

    bool operator==(const TripleContent&) const = default;
};

// Ordered column-name -> value mapping. Order is the table's schema order.
using RowContent = std::vector<std::pair<std::string, std::string>>;

using Content = std::variant<std::string, RowContent, TripleContent>;

struct Segment {
    std::string id;
    LevelTag level = LevelTag::document;
    std::optional<std::string> parent;
    Content content;
    Metadata metadata;

    bool operator==(const Segment&) const = default;
};

// Human-readable rendering of a segment's content: text spans verbatim,
// rows as "col: val; ...", triples as "h r t".
std::string content_text(const Segment& seg);

// Ordered segment container. Immutable after construction; the id index is
// derived in the constructor.
class Hseq {
public:
    Hseq() = default;
    explicit Hseq(std::vector<Segment> segments);

    const std::vector<Segment>& segments() const { return segments_; }
    size_t size() const { return segments_.size(); }
    bool empty() const { return segments_.empty(); }

    // Position of the first segment with this id, if any.
    std::optional<size_t> position(std::string_view id) const;
    const Segment* find(std::string_view id) const;

    bool operator==(const Hseq& other) const { return segments_ == other.segments_; }

private:
    std::vector<Segment> segments_;
    std::unordered_map<std::string, size_t> index_;
};

struct Violation {
    std::string segment_id;
    std::string rule;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

// Checks every schema invariant; violations are data, not failures.
ValidationReport validate(const Hseq& h);

// Strict total order over segments: level rank (paragraph=0, table_row=1,
// sentence=2, triplet=3, roots and cells last), then (uri, offsets), then id.
// Returns <0, 0, >0.
int rho_compare(const Segment& a, const Segment& b);
int rho_level_rank(LevelTag level);

// True for the levels that enter candidate streams.
bool is_candidate_level(LevelTag level);

struct ParseError : std::runtime_error {
    ParseError(size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_no(line) {}
    size_t line_no;
};

// Line-delimited persistence, one segment object per line, byte-deterministic.
// serialize requires validate(h) to be empty.
std::string serialize(const Hseq& h);
Hseq deserialize(std::string_view bytes);

std::string serialize_segment(const Segment& seg);
Segment parse_segment_line(std::string_view line, size_t line_no);

// Deterministic segment id: "<prefix>_<first 8 hex of sha1>" over
// (uri, level, offsets) plus an extra discriminator for KG levels, where
// offsets are constant.
std::string make_segment_id(std::string_view uri, LevelTag level, Offsets offsets,
                            std::string_view extra = {});

}  // namespace hseq
