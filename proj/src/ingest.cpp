#include "hseq/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace hseq {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read '" + path.string() + "'");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == delimiter) {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

std::vector<std::string> file_lines(const std::string& body) {
    std::vector<std::string> lines;
    std::string current;
    for (char ch : body) {
        if (ch == '\n') {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    if (!current.empty()) lines.push_back(current);
    return lines;
}

TableSource parse_table_file(const fs::path& path, char delimiter) {
    auto lines = file_lines(read_file(path));
    TableSource table;
    table.source_id = path.stem().string();
    table.uri = path.string();
    if (lines.empty()) return table;
    table.header = split(lines[0], delimiter);
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i], delimiter);
        if (fields.size() != table.header.size()) {
            throw IngestError(path.string() + ":" + std::to_string(i + 1) + ": expected " +
                              std::to_string(table.header.size()) + " fields, got " +
                              std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

std::vector<KgEdge> parse_kg_file(const fs::path& path) {
    auto lines = file_lines(read_file(path));
    std::vector<KgEdge> edges;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i], '\t');
        if (fields.size() != 3 && fields.size() != 4) {
            throw IngestError(path.string() + ":" + std::to_string(i + 1) +
                              ": expected 3 or 4 tab-separated fields, got " +
                              std::to_string(fields.size()));
        }
        if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            throw IngestError(path.string() + ":" + std::to_string(i + 1) +
                              ": head/relation/tail must be nonempty");
        }
        KgEdge edge{fields[0], fields[1], fields[2], std::nullopt};
        if (fields.size() == 4 && !fields[3].empty()) edge.time = fields[3];
        edges.push_back(std::move(edge));
    }
    return edges;
}

std::vector<fs::path> files_under(const std::string& path) {
    fs::path root(path);
    if (!fs::exists(root)) throw IngestError("path does not exist: '" + path + "'");
    if (fs::is_regular_file(root)) return {root};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

std::optional<IngestFormat> ingest_format_from_name(std::string_view name) {
    if (name == "text") return IngestFormat::text;
    if (name == "table") return IngestFormat::table;
    if (name == "kg") return IngestFormat::kg;
    return std::nullopt;
}

Corpus ingest(const std::string& path, IngestFormat format, char table_delimiter) {
    Corpus corpus;
    auto files = files_under(path);
    switch (format) {
        case IngestFormat::text:
            for (const auto& file : files) {
                corpus.texts.push_back({file.stem().string(), file.string(), read_file(file)});
            }
            break;
        case IngestFormat::table:
            for (const auto& file : files) {
                corpus.tables.push_back(parse_table_file(file, table_delimiter));
            }
            break;
        case IngestFormat::kg:
            for (const auto& file : files) {
                auto edges = parse_kg_file(file);
                corpus.kg_edges.insert(corpus.kg_edges.end(), edges.begin(), edges.end());
                corpus.kg_source_id = file.stem().string();
                corpus.kg_uri = file.string();
            }
            break;
    }
    return corpus;
}

void merge_corpus(Corpus& a, const Corpus& b) {
    a.texts.insert(a.texts.end(), b.texts.begin(), b.texts.end());
    a.tables.insert(a.tables.end(), b.tables.begin(), b.tables.end());
    a.kg_edges.insert(a.kg_edges.end(), b.kg_edges.begin(), b.kg_edges.end());
    if (!b.kg_edges.empty()) {
        a.kg_source_id = b.kg_source_id;
        a.kg_uri = b.kg_uri;
    }
}

}  // namespace hseq
