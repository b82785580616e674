#pragma once

#include <string>
#include <vector>

#include "hseq/adapters.hpp"
#include "hseq/engine.hpp"

namespace hseq::test {

// Film-list fixture: four context paragraphs plus a table of 2004 Russian
// films. The key paragraph ties the film to its source novel and author.
struct CaseStudy {
    Corpus corpus;
    Hseq h;
    std::string question = "Who is the author of the novel that inspired the 2004 Russian "
                           "film directed by Timur Bekmambetov?";
    std::string gold = "Sergei Lukyanenko";
    std::string key_paragraph_id;       // the Night Watch paragraph
    Offsets key_paragraph_offsets;
    std::string key_paragraph_uri;
    std::vector<std::string> context_paragraph_ids;  // the three list/context paragraphs
    std::vector<std::string> row_ids;                // table rows in index order

    CaseStudy() {
        corpus.texts.push_back(
            {"films_text", "text://russian-films-2004",
             "Night Watch is a 2004 Russian supernatural thriller film directed by Timur "
             "Bekmambetov. It is loosely based on the novel The Night Watch by Sergei "
             "Lukyanenko.\n\n"
             "List of Russian films of 2004 collects the feature films released that "
             "year.\n\n"
             "The year 2004 saw several notable releases across genres.\n\n"
             "Russian cinema in 2004 included thrillers, dramas, and comedies."});
        corpus.tables.push_back({"films_table", "tbl://russian-films-2004",
                                 {"title", "year", "director"},
                                 {{"Night Watch", "2004", "Timur Bekmambetov"},
                                  {"Arie", "2004", "Roman Kachanov"},
                                  {"Countdown", "2004", "Yevgeni Lavrentyev"},
                                  {"Dad or Papa", "2004", "Vladimir Mashkov"},
                                  {"Night Watch Day", "2004", "Other Director"},
                                  {"72 Meters", "2004", "Vladimir Khotinenko"}}});
        h = encode(corpus);

        for (const auto& seg : h.segments()) {
            if (seg.level == LevelTag::paragraph) {
                const auto& text = std::get<std::string>(seg.content);
                if (text.find("Sergei Lukyanenko") != std::string::npos) {
                    key_paragraph_id = seg.id;
                    key_paragraph_offsets = seg.metadata.offsets;
                    key_paragraph_uri = seg.metadata.uri;
                } else {
                    context_paragraph_ids.push_back(seg.id);
                }
            } else if (seg.level == LevelTag::table_row) {
                row_ids.push_back(seg.id);
            }
        }
    }

    // Six-step replay: the key paragraph, then context paragraphs, then the
    // confirming row, then corroborating rows; the loop runs to the step cap.
    std::vector<PolicyDecision> scripted_steps() const {
        auto step = [](std::vector<std::string> ids) {
            PolicyDecision d;
            d.segment_ids = std::move(ids);
            d.strategy = "guided_topk";
            d.top_k = 4;
            d.sufficiency = false;
            return d;
        };
        return {
            step({key_paragraph_id}),
            step({context_paragraph_ids[0], context_paragraph_ids[1], context_paragraph_ids[2]}),
            step({row_ids[0]}),
            step({row_ids[1]}),
            step({row_ids[2], row_ids[3]}),
            step({row_ids[4], row_ids[5]}),
        };
    }
};

}  // namespace hseq::test
