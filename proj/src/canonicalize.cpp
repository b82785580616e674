#include "hseq/canonicalize.hpp"

#include <algorithm>
#include <map>

#include "hseq/sha1.hpp"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

std::string evidence_id(const std::string& uri, Offsets offsets) {
    std::string data = uri;
    data.push_back('\0');
    data += std::to_string(offsets.first);
    data.push_back(':');
    data += std::to_string(offsets.second);
    return sha1_hex(data);
}

namespace {

EvidenceItem item_from_segment(const Segment& seg) {
    EvidenceItem item;
    item.id = evidence_id(seg.metadata.uri, seg.metadata.offsets);
    item.level = seg.level;
    item.uri = seg.metadata.uri;
    item.offsets = seg.metadata.offsets;
    item.source_type = seg.metadata.source_type;
    item.snippet = content_text(seg);
    item.meta.schema = seg.metadata.schema;
    item.meta.time = seg.metadata.time;
    item.meta.source_version = seg.metadata.source_version;
    item.meta.sha1 = sha1_hex(item.snippet);
    return item;
}

}  // namespace

EvidencePackage canonicalize(const std::vector<std::string>& selected_ids, const Hseq& h,
                             const std::string& question, const std::string& episode_ref) {
    EvidencePackage pkg;
    pkg.question = question;
    pkg.episode_ref = episode_ref;

    // Dedup by (uri, offsets), keeping the rho-earliest segment; independent
    // of the order selected_ids arrive in.
    std::map<std::pair<std::string, Offsets>, const Segment*> survivors;
    for (const auto& id : selected_ids) {
        const Segment* seg = h.find(id);
        if (!seg) {
            throw std::invalid_argument("canonicalize: id '" + id + "' does not resolve");
        }
        auto key = std::make_pair(seg->metadata.uri, seg->metadata.offsets);
        auto it = survivors.find(key);
        if (it == survivors.end() || rho_compare(*seg, *it->second) < 0) {
            survivors[key] = seg;
        }
    }

    for (const auto& [key, seg] : survivors) {
        pkg.items.push_back(item_from_segment(*seg));
    }
    std::sort(pkg.items.begin(), pkg.items.end(), [](const EvidenceItem& a, const EvidenceItem& b) {
        if (a.uri != b.uri) return a.uri < b.uri;
        return a.offsets < b.offsets;
    });
    return pkg;
}

bool verify_content_preserving(const EvidencePackage& pkg, const Hseq& h) {
    for (const auto& item : pkg.items) {
        if (item.meta.sha1 != sha1_hex(item.snippet)) return false;
        if (item.id != evidence_id(item.uri, item.offsets)) return false;
        // (uri, offsets) may legitimately match several segments (a
        // single-sentence paragraph and its sentence share the span; KG
        // levels all carry (-1,-1)). The item must be reproducible from one
        // of them; reproducing segments are rendering-identical, so the
        // traced content is unique.
        bool reproduced = false;
        for (const auto& seg : h.segments()) {
            if (seg.metadata.uri != item.uri || seg.metadata.offsets != item.offsets) continue;
            if (item_from_segment(seg) == item) {
                reproduced = true;
                break;
            }
        }
        if (!reproduced) return false;
    }
    return true;
}

namespace {

ordered_json item_to_json(const EvidenceItem& item) {
    ordered_json j;
    j["id"] = item.id;
    j["level"] = std::string(level_name(item.level));
    j["uri"] = item.uri;
    j["offsets"] = ordered_json::array({item.offsets.first, item.offsets.second});
    j["source_type"] = std::string(source_type_name(item.source_type));
    j["snippet"] = item.snippet;
    ordered_json meta;
    if (item.meta.schema) meta["schema"] = *item.meta.schema;
    if (item.meta.time) meta["time"] = *item.meta.time;
    if (item.meta.source_version) meta["source_version"] = *item.meta.source_version;
    meta["sha1"] = item.meta.sha1;
    j["meta"] = std::move(meta);
    return j;
}

}  // namespace

std::string serialize_package(const EvidencePackage& pkg) {
    ordered_json j;
    j["question"] = pkg.question;
    j["episode_ref"] = pkg.episode_ref;
    ordered_json items = ordered_json::array();
    for (const auto& item : pkg.items) items.push_back(item_to_json(item));
    j["items"] = std::move(items);
    return j.dump();
}

EvidencePackage parse_package(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    EvidencePackage pkg;
    pkg.question = j.at("question").get<std::string>();
    pkg.episode_ref = j.at("episode_ref").get<std::string>();
    for (const auto& ij : j.at("items")) {
        EvidenceItem item;
        item.id = ij.at("id").get<std::string>();
        auto level = level_from_name(ij.at("level").get<std::string>());
        if (!level) throw std::invalid_argument("unknown level in evidence item");
        item.level = *level;
        item.uri = ij.at("uri").get<std::string>();
        item.offsets = {ij.at("offsets").at(0).get<long long>(),
                        ij.at("offsets").at(1).get<long long>()};
        auto st = source_type_from_name(ij.at("source_type").get<std::string>());
        if (!st) throw std::invalid_argument("unknown source_type in evidence item");
        item.source_type = *st;
        item.snippet = ij.at("snippet").get<std::string>();
        const auto& meta = ij.at("meta");
        if (meta.contains("schema"))
            item.meta.schema = meta["schema"].get<std::vector<std::string>>();
        if (meta.contains("time")) item.meta.time = meta["time"].get<std::string>();
        if (meta.contains("source_version"))
            item.meta.source_version = meta["source_version"].get<std::string>();
        item.meta.sha1 = meta.at("sha1").get<std::string>();
        pkg.items.push_back(std::move(item));
    }
    return pkg;
}

}  // namespace hseq
