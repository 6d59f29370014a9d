#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "compstat/association.hpp"
#include "compstat/classify.hpp"
#include "compstat/codec.hpp"
#include "compstat/homogeneity.hpp"
#include "compstat/markov.hpp"
#include "compstat/model_format.hpp"
#include "compstat/types.hpp"

namespace py = pybind11;
using namespace compstat;

namespace {

// Backend strings use the model-file syntax: "lz78", "ppm 3", "bwt",
// "bwt 4096", "external CMD ...".
CompressorSpec backend_from(const std::string& text) {
  std::istringstream stream(text);
  std::vector<std::string> tokens;
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return parse_backend_tokens(tokens);
}

AlphabetRef shared_alphabet(const std::vector<std::vector<std::string>>& groups) {
  std::set<std::string> seen;
  for (const auto& tokens : groups) seen.insert(tokens.begin(), tokens.end());
  if (seen.size() < 2) {
    throw Error(errc::domain_error, "inputs contain fewer than 2 distinct tokens");
  }
  return std::make_shared<Alphabet>(
      Alphabet(std::vector<std::string>(seen.begin(), seen.end())));
}

Sequence to_sequence(const std::vector<std::string>& tokens, const AlphabetRef& alphabet) {
  std::vector<Symbol> data;
  data.reserve(tokens.size());
  for (const auto& token : tokens) {
    const auto symbol = alphabet->find(token);
    if (!symbol) throw Error(errc::domain_error, "token not in alphabet: " + token);
    data.push_back(*symbol);
  }
  return Sequence(alphabet, std::move(data));
}

std::vector<std::string> to_tokens(const Sequence& sequence) {
  std::vector<std::string> tokens;
  tokens.reserve(sequence.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    tokens.emplace_back(sequence.alphabet()->token(sequence[i]));
  }
  return tokens;
}

py::dict table_dict(const ContingencyTable& table) {
  py::list counts;
  for (std::size_t r = 0; r < table.rows; ++r) {
    py::list row;
    for (std::size_t c = 0; c < table.cols; ++c) row.append(table.at(r, c));
    counts.append(row);
  }
  py::dict d;
  d["counts"] = counts;
  d["row_labels"] = table.row_labels;
  d["col_labels"] = table.col_labels;
  return d;
}

py::dict report_dict(const TestReport& report) {
  py::dict d;
  d["method"] = method_name(report.method);
  d["statistic"] = report.statistic ? py::object(py::float_(*report.statistic))
                                    : py::object(py::none());
  d["df"] = report.df;
  d["p_value"] = report.p_value;
  d["alpha"] = report.alpha;
  d["decision"] = decision_name(report.decision);
  d["table"] = table_dict(report.table);
  d["gammas"] = report.gammas;
  d["deltas"] = report.deltas;
  d["warnings"] = report.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compression-based statistics: code lengths, homogeneity tests, "
            "association coefficients, and Markov sources";

  py::register_exception<Error>(m, "CompstatError");

  m.def(
      "compress_length",
      [](const std::vector<std::string>& tokens, const std::string& backend,
         std::optional<std::vector<std::string>> alphabet) {
        const AlphabetRef ref =
            alphabet ? std::make_shared<Alphabet>(Alphabet(*alphabet)) : shared_alphabet({tokens});
        return compress_length(backend_from(backend), to_sequence(tokens, ref)).bits;
      },
      py::arg("tokens"), py::arg("backend") = "ppm 3", py::arg("alphabet") = py::none(),
      "Total code length in bits of one token sequence.");

  m.def(
      "conditional_length",
      [](const std::vector<std::string>& target, const std::vector<std::string>& context,
         const std::string& backend) {
        const AlphabetRef ref = shared_alphabet({target, context});
        return conditional_length(backend_from(backend), to_sequence(target, ref),
                                  to_sequence(context, ref))
            .bits;
      },
      py::arg("target"), py::arg("context"), py::arg("backend") = "ppm 3",
      "Bits to encode target after context was already encoded.");

  m.def(
      "kraft_sum",
      [](const std::string& backend, std::size_t n, const std::vector<std::string>& alphabet) {
        return kraft_sum(backend_from(backend), n,
                         std::make_shared<Alphabet>(Alphabet(alphabet)));
      },
      py::arg("backend"), py::arg("n"), py::arg("alphabet"),
      "Sum of 2^-length over every word of length n.");

  m.def(
      "homogeneity_test",
      [](const std::vector<std::vector<std::string>>& x,
         const std::vector<std::vector<std::string>>& y, const std::string& backend,
         double alpha, const std::string& split, std::uint64_t seed, bool yates) {
        std::vector<std::vector<std::string>> all = x;
        all.insert(all.end(), y.begin(), y.end());
        const AlphabetRef ref = shared_alphabet(all);
        SampleGroup gx{"x", {}}, gy{"y", {}};
        for (const auto& tokens : x) gx.sequences.push_back(to_sequence(tokens, ref));
        for (const auto& tokens : y) gy.sequences.push_back(to_sequence(tokens, ref));
        HomogeneityOptions options;
        options.alpha = alpha;
        options.yates = yates;
        options.split = SplitPlan{
            split == "random" ? SplitPolicy::seeded_random : SplitPolicy::first_half, seed};
        return report_dict(homogeneity_test(gx, gy, backend_from(backend), options));
      },
      py::arg("x"), py::arg("y"), py::arg("backend") = "ppm 3", py::arg("alpha") = 0.05,
      py::arg("split") = "first", py::arg("seed") = 0, py::arg("yates") = true,
      "Compression-based two-sample homogeneity test on groups of token lists.");

  m.def(
      "associate",
      [](std::uint64_t n11, std::uint64_t n12, std::uint64_t n21, std::uint64_t n22,
         double confidence) {
        const auto report =
            associate(ContingencyTable::make_2x2(n11, n12, n21, n22), confidence);
        py::dict d;
        d["q"] = report.q;
        d["v"] = report.v;
        d["se_q"] = report.se_q ? py::object(py::float_(*report.se_q)) : py::object(py::none());
        d["se_v"] = report.se_v;
        d["ci_q"] = report.ci_q
                        ? py::object(py::make_tuple(report.ci_q->low, report.ci_q->high))
                        : py::object(py::none());
        d["ci_v"] = py::make_tuple(report.ci_v.low, report.ci_v.high);
        d["confidence"] = report.confidence;
        d["warnings"] = report.warnings;
        return d;
      },
      py::arg("n11"), py::arg("n12"), py::arg("n21"), py::arg("n22"),
      py::arg("confidence") = 0.95,
      "Yule's Q and the V coefficient with standard errors for a 2x2 table.");

  m.def(
      "classify",
      [](const std::vector<std::string>& target,
         const std::vector<std::pair<std::string, std::vector<std::string>>>& references,
         const std::string& backend, double ratio_threshold) {
        std::vector<std::vector<std::string>> all = {target};
        for (const auto& [label, tokens] : references) all.push_back(tokens);
        const AlphabetRef ref = shared_alphabet(all);
        TrainingBank bank;
        bank.spec = backend_from(backend);
        for (const auto& [label, tokens] : references) {
          bank.classes.push_back(TrainingBank::Entry{label, to_sequence(tokens, ref)});
        }
        const auto result = classify(to_sequence(target, ref), bank, ratio_threshold);
        py::dict d;
        d["winner_label"] = result.winner_label;
        d["winner_index"] = result.winner_index;
        d["scores"] = result.scores;
        d["margin"] = result.margin ? py::object(py::float_(*result.margin))
                                    : py::object(py::none());
        d["length_ratio"] = result.length_ratio;
        d["ratio_warning"] = result.ratio_warning ? py::object(py::str(*result.ratio_warning))
                                                  : py::object(py::none());
        return d;
      },
      py::arg("target"), py::arg("references"), py::arg("backend") = "ppm 3",
      py::arg("ratio_threshold") = 0.1,
      "Assign target to the reference class with the smallest conditional length.");

  py::class_<MarkovModel>(m, "MarkovModel")
      .def_property_readonly("order", [](const MarkovModel& model) { return model.order; })
      .def_property_readonly("alphabet", [](const MarkovModel& model) {
        std::vector<std::string> tokens;
        for (std::size_t i = 0; i < model.alphabet->size(); ++i) {
          tokens.emplace_back(model.alphabet->token(static_cast<Symbol>(i)));
        }
        return tokens;
      });

  m.def("bernoulli_model", &bernoulli_model, py::arg("p1"),
        "I.i.d. binary source emitting token \"1\" with probability p1.");
  m.def("binary_flip_model", &binary_flip_model, py::arg("flip"),
        "Order-1 binary source that repeats its last symbol unless it flips.");
  m.def(
      "markov_model",
      [](const std::vector<std::string>& alphabet, unsigned order,
         const std::vector<double>& transition, std::optional<std::vector<double>> initial) {
        MarkovModel model;
        model.alphabet = std::make_shared<Alphabet>(Alphabet(alphabet));
        model.order = order;
        model.transition = transition;
        if (initial) model.initial = *initial;
        validate(model);
        return model;
      },
      py::arg("alphabet"), py::arg("order"), py::arg("transition"),
      py::arg("initial") = py::none(),
      "Build a finite-memory source from a row-stochastic transition table.");

  m.def(
      "generate",
      [](const MarkovModel& model, std::size_t length, std::uint64_t seed) {
        return to_tokens(generate(model, length, seed));
      },
      py::arg("model"), py::arg("length"), py::arg("seed"),
      "Sample a token sequence; identical (model, length, seed) gives identical output.");

  m.def("entropy_m", &entropy_m, py::arg("model"), py::arg("m"),
        "Order-m conditional Shannon entropy in bits per symbol.");
  m.def("limit_entropy", &limit_entropy, py::arg("model"),
        "The source's entropy rate, the compressibility floor.");
  m.def(
      "kl_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        return kl_divergence(p, q);
      },
      py::arg("p"), py::arg("q"), "Kullback-Leibler divergence D(p || q) in bits.");
}
