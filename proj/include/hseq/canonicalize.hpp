#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hseq/model.hpp"

namespace hseq {

struct EvidenceMeta {
    std::optional<std::vector<std::string>> schema;
    std::optional<std::string> time;
    std::optional<std::string> source_version;
    std::string sha1;  // digest of the snippet

    bool operator==(const EvidenceMeta&) const = default;
};

struct EvidenceItem {
    std::string id;  // evidence_id(uri, offsets)
    LevelTag level = LevelTag::paragraph;
    std::string uri;
    Offsets offsets{0, 0};
    SourceType source_type = SourceType::text;
    std::string snippet;
    EvidenceMeta meta;

    bool operator==(const EvidenceItem&) const = default;
};

// Deduplicated by (uri, offsets), sorted by uri then offsets.
struct EvidencePackage {
    std::string question;
    std::string episode_ref;
    std::vector<EvidenceItem> items;

    bool operator==(const EvidencePackage&) const = default;
};

// Lowercase hex sha1 over uri + NUL + decimal(a) + ":" + decimal(b).
std::string evidence_id(const std::string& uri, Offsets offsets);

// Maps selected segments to evidence items: snippets render content
// human-readably, duplicates by (uri, offsets) keep the rho-earliest segment,
// items are deterministically ordered. Invariant to input ordering.
// Throws std::invalid_argument naming any id that does not resolve in h.
EvidencePackage canonicalize(const std::vector<std::string>& selected_ids, const Hseq& h,
                             const std::string& question, const std::string& episode_ref = "");

// True iff every item reproduces its source segment's content and key
// metadata under the rendering rules and carries a matching snippet digest.
bool verify_content_preserving(const EvidencePackage& pkg, const Hseq& h);

// Single JSON object with stable key order.
std::string serialize_package(const EvidencePackage& pkg);
EvidencePackage parse_package(const std::string& text);

}  // namespace hseq
