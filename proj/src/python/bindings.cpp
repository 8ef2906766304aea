#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "melcond/error.h"
#include "melcond/eval/bleu.h"
#include "melcond/eval/divergence.h"
#include "melcond/eval/features.h"
#include "melcond/ingest.h"
#include "melcond/pipeline/pipeline.h"
#include "melcond/tokenizer.h"

namespace py = pybind11;
using namespace melcond;

namespace {

// Runs a subcommand, returning (exit code, log text).
template <typename Options, typename Fn>
std::pair<int, std::string> run(Fn fn, const Options& o) {
  std::ostringstream log;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = fn(o, log);
  }
  return {code, log.str()};
}

std::optional<std::vector<ConditioningConfig>> subset_arg(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return parse_subset(*s);
}

}  // namespace

PYBIND11_MODULE(_melcond, m) {
  m.doc() = "Chord-conditioned melody models";
  m.attr("__version__") = kToolVersion;

  py::register_exception<Error>(m, "MelcondError", PyExc_ValueError);

  py::class_<TokenizedSong>(m, "TokenizedSong")
      .def_readonly("pitch", &TokenizedSong::pitch)
      .def_readonly("duration", &TokenizedSong::duration)
      .def_readonly("barpos", &TokenizedSong::barpos)
      .def("__len__", &TokenizedSong::size)
      .def("to_json", &serialize_tokens);

  m.def("tokenize_canonical", [](const std::string& doc) { return tokenize(parse_canonical(doc)); },
        py::arg("document"), "Tokenize a canonical lead-sheet JSON document.");
  m.def("detokenize_canonical", [](const TokenizedSong& s) { return serialize_canonical(detokenize(s)); },
        py::arg("song"));
  m.def("parse_tokens", [](const std::string& doc) { return parse_tokens(doc); }, py::arg("document"));
  m.def("synthetic_corpus",
        [](std::uint64_t seed, int n, const std::string& style) {
          std::vector<std::string> docs;
          for (const auto& s : generate_synthetic_corpus(seed, n, parse_synthetic_style(style))) {
            docs.push_back(serialize_canonical(s));
          }
          return docs;
        },
        py::arg("seed"), py::arg("songs"), py::arg("style") = "chord-locked",
        "Canonical JSON documents of a deterministic synthetic corpus.");

  m.def("features",
        [](const TokenizedSong& s) {
          py::dict d;
          const SongFeatures f = extract_features(s);
          for (Feature id : all_features()) {
            const auto& v = f[static_cast<std::size_t>(id)];
            const py::str key(std::string(feature_name(id)));
            if (!v) {
              d[key] = py::none();
            } else if (is_distribution(id)) {
              d[key] = py::cast(*v);
            } else {
              d[key] = v->front();
            }
          }
          return d;
        },
        py::arg("song"));
  m.def("kl_divergence", &kl_divergence, py::arg("p"), py::arg("q"), py::arg("eps") = 1e-6);
  m.def("corpus_bleu",
        [](const std::vector<std::vector<int>>& c, const std::vector<std::vector<int>>& r, int max_n) {
          const BleuResult b = corpus_bleu(c, r, max_n);
          py::dict d;
          d["bleu"] = b.bleu;
          d["smoothed"] = b.smoothed;
          d["precisions"] = b.precisions;
          d["brevity_penalty"] = b.brevity_penalty;
          return d;
        },
        py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4);

  m.def("valid_configurations", &valid_abbreviations);

  m.def("ingest_synthetic",
        [](const std::string& out, std::uint64_t seed, int songs, const std::string& style) {
          return run(cmd_ingest, IngestOptions{out, {}, SyntheticSpec{seed, songs, parse_synthetic_style(style)}});
        },
        py::arg("out"), py::arg("seed"), py::arg("songs"), py::arg("style") = "chord-locked");
  m.def("ingest_paths",
        [](const std::string& out, const std::vector<std::string>& inputs) {
          return run(cmd_ingest, IngestOptions{out, inputs, std::nullopt});
        },
        py::arg("out"), py::arg("inputs"));
  m.def("train",
        [](const std::string& config, const std::string& out, std::optional<std::string> subset,
           std::optional<std::uint64_t> seed, int jobs) {
          return run(cmd_train, TrainOptions{config, out, subset_arg(subset), seed, jobs});
        },
        py::arg("config"), py::arg("out"), py::arg("subset") = py::none(), py::arg("seed") = py::none(),
        py::arg("jobs") = 1);
  m.def("generate",
        [](const std::string& out, std::optional<std::string> subset, std::optional<std::uint64_t> seed, bool tokens,
           int jobs) { return run(cmd_generate, GenerateOptions{out, subset_arg(subset), seed, tokens, jobs}); },
        py::arg("out"), py::arg("subset") = py::none(), py::arg("seed") = py::none(), py::arg("tokens") = false,
        py::arg("jobs") = 1);
  m.def("evaluate", [](const std::string& out, int jobs) { return run(cmd_evaluate, EvaluateOptions{out, jobs}); },
        py::arg("out"), py::arg("jobs") = 1);
}
