#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hseq/adapters.hpp"
#include "hseq/canonicalize.hpp"
#include "hseq/engine.hpp"
#include "hseq/guidance.hpp"
#include "hseq/metrics.hpp"
#include "hseq/model.hpp"
#include "hseq/policy_llm.hpp"
#include "hseq/supervision.hpp"
#include "hseq/theory.hpp"

namespace py = pybind11;
using namespace hseq;

namespace {

py::dict segment_to_dict(const Segment& seg) {
    py::dict d;
    d["id"] = seg.id;
    d["level"] = std::string(level_name(seg.level));
    if (seg.parent) {
        d["parent"] = *seg.parent;
    } else {
        d["parent"] = py::none();
    }
    d["content"] = content_text(seg);
    d["uri"] = seg.metadata.uri;
    d["source_id"] = seg.metadata.source_id;
    d["offsets"] = py::make_tuple(seg.metadata.offsets.first, seg.metadata.offsets.second);
    d["source_type"] = std::string(source_type_name(seg.metadata.source_type));
    return d;
}

Corpus corpus_from_parts(
    const std::vector<std::tuple<std::string, std::string, std::string>>& texts,
    const std::vector<std::tuple<std::string, std::string, std::vector<std::string>,
                                 std::vector<std::vector<std::string>>>>& tables,
    const std::vector<std::tuple<std::string, std::string, std::string>>& kg_edges) {
    Corpus corpus;
    for (const auto& [source_id, uri, body] : texts) {
        corpus.texts.push_back({source_id, uri, body});
    }
    for (const auto& [source_id, uri, header, rows] : tables) {
        corpus.tables.push_back({source_id, uri, header, rows});
    }
    for (const auto& [head, relation, tail] : kg_edges) {
        corpus.kg_edges.push_back({head, relation, tail, std::nullopt});
    }
    return corpus;
}

py::dict episode_to_dict(const EpisodeResult& result) {
    py::dict d;
    d["selected"] = result.selected;
    d["steps"] = result.steps;
    d["stop_reason"] = std::string(stop_reason_name(result.stop_reason));
    d["trace"] = serialize_trace(result);
    return d;
}

}  // namespace

PYBIND11_MODULE(_hseq, m) {
    m.doc() = "Reversible linearization of heterogeneous sources with budgeted guided "
              "iterative evidence selection";

    py::class_<Hseq>(m, "Hseq")
        .def(py::init<>())
        .def("__len__", &Hseq::size)
        .def("serialize", [](const Hseq& h) { return serialize(h); })
        .def("ids",
             [](const Hseq& h) {
                 std::vector<std::string> ids;
                 for (const auto& seg : h.segments()) ids.push_back(seg.id);
                 return ids;
             })
        .def("segments",
             [](const Hseq& h) {
                 py::list out;
                 for (const auto& seg : h.segments()) out.append(segment_to_dict(seg));
                 return out;
             })
        .def("validate", [](const Hseq& h) {
            py::list out;
            for (const auto& v : validate(h)) {
                py::dict d;
                d["segment_id"] = v.segment_id;
                d["rule"] = v.rule;
                d["detail"] = v.detail;
                out.append(d);
            }
            return out;
        });

    m.def("deserialize", [](const std::string& bytes) { return deserialize(bytes); },
          py::arg("bytes"));

    m.def(
        "encode_text",
        [](const std::string& source_id, const std::string& uri, const std::string& body) {
            return Hseq(encode_text(source_id, uri, body));
        },
        py::arg("source_id"), py::arg("uri"), py::arg("body"));

    m.def(
        "encode_table",
        [](const std::string& source_id, const std::string& uri,
           const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
            return Hseq(encode_table({source_id, uri, header, rows}));
        },
        py::arg("source_id"), py::arg("uri"), py::arg("header"), py::arg("rows"));

    m.def(
        "encode_kg",
        [](const std::string& source_id, const std::string& uri,
           const std::vector<std::tuple<std::string, std::string, std::string>>& edges) {
            std::vector<KgEdge> kg;
            for (const auto& [h, r, t] : edges) kg.push_back({h, r, t, std::nullopt});
            return Hseq(encode_kg(source_id, uri, kg));
        },
        py::arg("source_id"), py::arg("uri"), py::arg("edges"));

    m.def(
        "encode_corpus",
        [](const std::vector<std::tuple<std::string, std::string, std::string>>& texts,
           const std::vector<std::tuple<std::string, std::string, std::vector<std::string>,
                                        std::vector<std::vector<std::string>>>>& tables,
           const std::vector<std::tuple<std::string, std::string, std::string>>& kg_edges) {
            return encode(corpus_from_parts(texts, tables, kg_edges));
        },
        py::arg("texts") = py::list(), py::arg("tables") = py::list(),
        py::arg("kg_edges") = py::list());

    m.def(
        "decode_text_bodies",
        [](const Hseq& h) {
            std::vector<std::string> bodies;
            for (const auto& text : decode(h).texts) bodies.push_back(text.body);
            return bodies;
        },
        py::arg("hseq"), "Text bodies reconstructed from an Hseq");

    m.def(
        "run_episode",
        [](const Hseq& h, const std::string& question, int window, int top_k, int t_max,
           int t_min) {
            IterationConfig cfg;
            cfg.window = window;
            cfg.top_k = top_k;
            cfg.t_max = t_max;
            cfg.t_min = t_min;
            Guidance guidance = template_guidance(question, classify_question(question));
            HeuristicPolicy policy;
            BudgetState budget;
            auto result = hseq::run_episode(question, h, guidance, policy, cfg, budget, {},
                                            fixed_clock());
            return episode_to_dict(result);
        },
        py::arg("hseq"), py::arg("question"), py::arg("window") = 48, py::arg("top_k") = 4,
        py::arg("t_max") = 6, py::arg("t_min") = 1,
        "Run one heuristic-policy selection episode");

    m.def(
        "canonicalize",
        [](const Hseq& h, const std::vector<std::string>& selected, const std::string& question) {
            return serialize_package(canonicalize(selected, h, question));
        },
        py::arg("hseq"), py::arg("selected_ids"), py::arg("question"),
        "Serialized evidence package for the selected segment ids");

    m.def(
        "verify_package",
        [](const std::string& package_json, const Hseq& h) {
            return verify_content_preserving(parse_package(package_json), h);
        },
        py::arg("package_json"), py::arg("hseq"));

    m.def("evidence_id",
          [](const std::string& uri, long long a, long long b) {
              return evidence_id(uri, {a, b});
          },
          py::arg("uri"), py::arg("a"), py::arg("b"));

    m.def("normalize_answer", &normalize_answer, py::arg("text"));
    m.def("em_f1", &em_f1, py::arg("prediction"), py::arg("gold"));
    m.def("classify_question",
          [](const std::string& q) { return std::string(question_type_name(classify_question(q))); },
          py::arg("question"));
    m.def("template_guidance",
          [](const std::string& q) {
              return template_guidance(q, classify_question(q)).text;
          },
          py::arg("question"));
    m.def("parse_decision_json",
          [](const std::string& text) {
              auto d = parse_decision(text);
              py::dict out;
              out["segment_ids"] = d.segment_ids;
              out["strategy"] = d.strategy;
              out["top_k"] = d.top_k;
              out["sufficiency"] = d.sufficiency;
              return out;
          },
          py::arg("text"));

    m.def(
        "simulate_stochastic",
        [](int k, int w, int prefix_len, int support, double p, long long trials,
           uint64_t seed) {
            auto report = simulate_stochastic(k, w, prefix_len, support, p, trials, seed);
            py::dict d;
            d["empirical"] = report.empirical;
            d["bound"] = report.bound;
            d["margin"] = report.margin;
            d["pass"] = report.pass;
            d["rounds"] = report.rounds;
            return d;
        },
        py::arg("k"), py::arg("w"), py::arg("prefix_len"), py::arg("support"), py::arg("p"),
        py::arg("trials"), py::arg("seed"));

    m.def("check_coverage",
          [](int k, int w, int prefix_len, int n) { return check_coverage(k, w, prefix_len, n); },
          py::arg("k"), py::arg("w"), py::arg("prefix_len"), py::arg("n_segments"));

    py::register_exception<ParseError>(m, "HseqParseError");
    py::register_exception<DecisionParseError>(m, "DecisionParseError");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "0.1.0";
#endif
}
