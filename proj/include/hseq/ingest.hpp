#pragma once

#include <string>

#include "hseq/adapters.hpp"

namespace hseq {

enum class IngestFormat { text, table, kg };

std::optional<IngestFormat> ingest_format_from_name(std::string_view name);

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads one path (file, or directory of files for text) into a Corpus.
//   text  - each file is one document
//   table - header line plus delimiter-separated rows, one table per file
//   kg    - tab-separated (head, relation, tail[, time]) lines
// Malformed rows/triples raise IngestError with file and line diagnostics.
Corpus ingest(const std::string& path, IngestFormat format, char table_delimiter = ',');

// Merges b into a (appends sources; concatenates KG edge multisets).
void merge_corpus(Corpus& a, const Corpus& b);

}  // namespace hseq
