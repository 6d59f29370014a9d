#include "compstat/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "compstat/association.hpp"
#include "compstat/classify.hpp"
#include "compstat/codec.hpp"
#include "compstat/experiments.hpp"
#include "compstat/homogeneity.hpp"
#include "compstat/markov.hpp"
#include "compstat/model_format.hpp"
#include "compstat/rng.hpp"
#include "compstat/stats.hpp"
#include "compstat/types.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace compstat::cli {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kSchema = "compstat-report/1";

// ---- input reading ----------------------------------------------------------

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw Error(errc::io_error, "cannot read file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(stream)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::string fnv1a64_hex(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 1099511628211ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string unescape(const std::string& text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      ++i;
      switch (text[i]) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '0': out.push_back('\0'); break;
        case '\\': out.push_back('\\'); break;
        default: out.push_back('\\'); out.push_back(text[i]);
      }
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

// ---- tokenization -----------------------------------------------------------

enum class Tokenize { bytes, utf8, words };

Tokenize tokenize_mode(const std::string& name) {
  if (name == "bytes") return Tokenize::bytes;
  if (name == "utf8") return Tokenize::utf8;
  if (name == "words") return Tokenize::words;
  throw Error(errc::usage_error, "unknown tokenizer \"" + name + "\"");
}

std::vector<std::string> byte_tokens(const std::vector<std::uint8_t>& record) {
  std::vector<std::string> tokens;
  tokens.reserve(record.size());
  char buffer[3];
  for (std::uint8_t b : record) {
    std::snprintf(buffer, sizeof buffer, "%02x", b);
    tokens.emplace_back(buffer);
  }
  return tokens;
}

std::vector<std::string> utf8_tokens(const std::vector<std::uint8_t>& record,
                                     const std::string& where) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < record.size()) {
    const std::uint8_t lead = record[i];
    std::size_t extra = 0;
    std::uint32_t code = 0;
    std::uint8_t lo = 0x80, hi = 0xBF;
    if (lead < 0x80) {
      code = lead;
    } else if (lead >= 0xC2 && lead <= 0xDF) {
      extra = 1;
      code = lead & 0x1Fu;
    } else if (lead >= 0xE0 && lead <= 0xEF) {
      extra = 2;
      code = lead & 0x0Fu;
      if (lead == 0xE0) lo = 0xA0;
      if (lead == 0xED) hi = 0x9F;
    } else if (lead >= 0xF0 && lead <= 0xF4) {
      extra = 3;
      code = lead & 0x07u;
      if (lead == 0xF0) lo = 0x90;
      if (lead == 0xF4) hi = 0x8F;
    } else {
      throw Error(errc::parse_error,
                  "invalid UTF-8 in " + where + " at byte " + std::to_string(i));
    }
    if (extra > 0 && i + extra >= record.size()) {
      throw Error(errc::parse_error,
                  "truncated UTF-8 in " + where + " at byte " + std::to_string(i));
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      const std::uint8_t byte = record[i + k];
      const std::uint8_t low = k == 1 ? lo : 0x80;
      const std::uint8_t high = k == 1 ? hi : 0xBF;
      if (byte < low || byte > high) {
        throw Error(errc::parse_error,
                    "invalid UTF-8 in " + where + " at byte " + std::to_string(i + k));
      }
      code = (code << 6) | (byte & 0x3Fu);
    }
    char buffer[12];
    std::snprintf(buffer, sizeof buffer, "U+%04X", code);
    tokens.emplace_back(buffer);
    i += extra + 1;
  }
  return tokens;
}

std::vector<std::string> word_tokens(const std::vector<std::uint8_t>& record) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::uint8_t b : record) {
    if (std::isspace(static_cast<int>(b))) {
      if (!current.empty()) tokens.push_back(std::move(current)), current.clear();
    } else {
      current.push_back(static_cast<char>(b));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> tokenize_record(const std::vector<std::uint8_t>& record, Tokenize mode,
                                         const std::string& where) {
  switch (mode) {
    case Tokenize::bytes: return byte_tokens(record);
    case Tokenize::utf8: return utf8_tokens(record, where);
    case Tokenize::words: return word_tokens(record);
  }
  return {};
}

// ---- corpus loading ---------------------------------------------------------

struct RawRecord {
  std::string source;  // file name or file:record tag, for diagnostics
  std::vector<std::string> tokens;
};

struct RawInput {
  std::string role;   // "x", "y", "target", class label ...
  std::string path;   // as given on the command line
  ordered_json files = ordered_json::array();
  std::vector<RawRecord> records;
  std::vector<std::string> warnings;
};

std::vector<std::vector<std::uint8_t>> split_records(const std::vector<std::uint8_t>& bytes,
                                                     const std::string& delimiter) {
  std::vector<std::vector<std::uint8_t>> records;
  if (delimiter.empty()) {
    records.push_back(bytes);
    return records;
  }
  std::size_t start = 0;
  while (start <= bytes.size()) {
    const auto it = std::search(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end(),
                                delimiter.begin(), delimiter.end());
    const std::size_t end = static_cast<std::size_t>(it - bytes.begin());
    records.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                         bytes.begin() + static_cast<std::ptrdiff_t>(end));
    if (it == bytes.end()) break;
    start = end + delimiter.size();
    if (start == bytes.size()) break;  // trailing delimiter: no empty tail record
  }
  return records;
}

// One input argument: a directory (one record per file) or a single file
// (records separated by the delimiter). `whole_file` disables splitting.
RawInput load_input(const std::string& role, const std::string& path_text, Tokenize mode,
                    const std::string& delimiter, bool whole_file) {
  RawInput input;
  input.role = role;
  input.path = path_text;
  const fs::path path(path_text);
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    if (files.empty()) throw Error(errc::io_error, "directory has no files: " + path_text);
    for (const auto& file : files) {
      const auto bytes = read_bytes(file);
      input.files.push_back(ordered_json{{"name", file.filename().string()},
                                         {"bytes", bytes.size()},
                                         {"digest", "fnv1a64:" + fnv1a64_hex(bytes)}});
      if (bytes.empty()) {
        input.warnings.push_back("empty file skipped: " + file.string());
        continue;
      }
      auto tokens = tokenize_record(bytes, mode, file.string());
      if (tokens.empty()) {
        input.warnings.push_back("file with no tokens skipped: " + file.string());
        continue;
      }
      input.records.push_back(RawRecord{file.filename().string(), std::move(tokens)});
    }
  } else if (fs::is_regular_file(path)) {
    const auto bytes = read_bytes(path);
    input.files.push_back(ordered_json{{"name", path.filename().string()},
                                       {"bytes", bytes.size()},
                                       {"digest", "fnv1a64:" + fnv1a64_hex(bytes)}});
    const auto pieces = whole_file ? std::vector<std::vector<std::uint8_t>>{bytes}
                                   : split_records(bytes, delimiter);
    std::size_t index = 0;
    for (const auto& piece : pieces) {
      ++index;
      const std::string where = path_text + ":record" + std::to_string(index);
      if (piece.empty()) continue;  // blank line / empty segment
      auto tokens = tokenize_record(piece, mode, where);
      if (tokens.empty()) {
        input.warnings.push_back("record with no tokens skipped: " + where);
        continue;
      }
      input.records.push_back(RawRecord{where, std::move(tokens)});
    }
    if (input.records.empty()) {
      throw Error(errc::domain_error, "no nonempty records in " + path_text);
    }
  } else {
    throw Error(errc::io_error, "no such file or directory: " + path_text);
  }
  return input;
}

// Applies the word-vocabulary cap in place: the `cap` most frequent tokens
// (ties broken lexicographically) survive; the rest collapse to one marker.
void apply_vocabulary_cap(std::vector<RawInput>& inputs, std::size_t cap) {
  std::map<std::string, std::uint64_t> frequency;
  for (const auto& input : inputs) {
    for (const auto& record : input.records) {
      for (const auto& token : record.tokens) ++frequency[token];
    }
  }
  if (frequency.size() <= cap) return;
  std::vector<std::pair<std::string, std::uint64_t>> ranked(frequency.begin(), frequency.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  ranked.resize(cap);
  std::map<std::string, bool> keep;
  for (const auto& [token, count] : ranked) {
    (void)count;
    keep[token] = true;
  }
  for (auto& input : inputs) {
    for (auto& record : input.records) {
      for (auto& token : record.tokens) {
        if (!keep.count(token)) token = "<oov>";
      }
    }
  }
}

struct Corpus {
  AlphabetRef alphabet;
  std::vector<RawInput> inputs;  // records retained for sequence building
  std::vector<std::vector<Sequence>> sequences;  // parallel to inputs
};

Corpus build_corpus(std::vector<RawInput> inputs, Tokenize mode, std::size_t vocab_cap) {
  if (mode == Tokenize::words) apply_vocabulary_cap(inputs, vocab_cap);
  std::map<std::string, bool> seen;
  for (const auto& input : inputs) {
    for (const auto& record : input.records) {
      for (const auto& token : record.tokens) seen[token] = true;
    }
  }
  std::vector<std::string> tokens;
  tokens.reserve(seen.size());
  for (const auto& [token, flag] : seen) {
    (void)flag;
    tokens.push_back(token);
  }
  if (tokens.size() < 2) {
    throw Error(errc::domain_error,
                "inputs contain fewer than 2 distinct tokens; nothing to compress");
  }
  Corpus corpus;
  corpus.alphabet = std::make_shared<Alphabet>(Alphabet(tokens));
  for (auto& input : inputs) {
    std::vector<Sequence> group;
    group.reserve(input.records.size());
    for (const auto& record : input.records) {
      std::vector<Symbol> symbols;
      symbols.reserve(record.tokens.size());
      for (const auto& token : record.tokens) symbols.push_back(*corpus.alphabet->find(token));
      group.emplace_back(corpus.alphabet, std::move(symbols));
    }
    corpus.sequences.push_back(std::move(group));
  }
  corpus.inputs = std::move(inputs);
  return corpus;
}

// ---- shared flag bundles ----------------------------------------------------

struct BackendFlags {
  std::string backend = "ppm";
  int ppm_order = 3;
  std::optional<std::size_t> bwt_block;
  std::string external_cmd;
};

void add_backend_flags(CLI::App* sub, BackendFlags& flags) {
  sub->add_option("--backend", flags.backend, "Compressor backend")
      ->check(CLI::IsMember({"lz78", "ppm", "bwt", "external"}))
      ->capture_default_str();
  sub->add_option("--ppm-order", flags.ppm_order, "PPM context order")->capture_default_str();
  sub->add_option("--bwt-block", flags.bwt_block, "Block size for the bwt backend");
  sub->add_option("--external-cmd", flags.external_cmd,
                  "Command template for the external backend ({in}/{out} placeholders)");
}

CompressorSpec resolve_backend(const BackendFlags& flags) {
  if (flags.backend == "lz78") return Lz78Spec{};
  if (flags.backend == "ppm") return PpmSpec{flags.ppm_order};
  if (flags.backend == "bwt") return BwtSpec{flags.bwt_block};
  if (flags.backend == "external") {
    if (flags.external_cmd.empty()) {
      throw Error(errc::usage_error, "--backend external requires --external-cmd");
    }
    return ExternalSpec{flags.external_cmd};
  }
  throw Error(errc::usage_error, "unknown backend \"" + flags.backend + "\"");
}

ordered_json backend_json(const BackendFlags& flags, const CompressorSpec& spec) {
  ordered_json j;
  j["backend"] = flags.backend;
  j["describe"] = describe(spec);
  if (flags.backend == "ppm") j["ppm_order"] = flags.ppm_order;
  if (flags.backend == "bwt") {
    j["bwt_block"] = flags.bwt_block ? ordered_json(*flags.bwt_block) : ordered_json(nullptr);
  }
  if (flags.backend == "external") j["external_cmd"] = flags.external_cmd;
  return j;
}

struct IngestFlags {
  std::string tokenize = "bytes";
  std::size_t vocab_cap = 5000;
  std::string delimiter = "\\n";
};

void add_ingest_flags(CLI::App* sub, IngestFlags& flags) {
  sub->add_option("--tokenize", flags.tokenize, "Token unit: bytes, utf8, or words")
      ->check(CLI::IsMember({"bytes", "utf8", "words"}))
      ->capture_default_str();
  sub->add_option("--vocab-cap", flags.vocab_cap,
                  "Most-frequent-word vocabulary size for --tokenize words")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--delimiter", flags.delimiter,
                  "Record delimiter for single-file groups (\\n, \\t, \\0 escapes)")
      ->capture_default_str();
}

ordered_json ingest_json(const IngestFlags& flags) {
  ordered_json j;
  j["tokenize"] = flags.tokenize;
  if (flags.tokenize == "words") j["vocab_cap"] = flags.vocab_cap;
  j["delimiter"] = flags.delimiter;
  return j;
}

// ---- report rendering -------------------------------------------------------

ordered_json table_json(const ContingencyTable& table) {
  ordered_json j;
  j["rows"] = table.rows;
  j["cols"] = table.cols;
  j["row_labels"] = table.row_labels;
  j["col_labels"] = table.col_labels;
  ordered_json counts = ordered_json::array();
  for (std::size_t r = 0; r < table.rows; ++r) {
    ordered_json row = ordered_json::array();
    for (std::size_t c = 0; c < table.cols; ++c) row.push_back(table.at(r, c));
    counts.push_back(row);
  }
  j["counts"] = counts;
  return j;
}

ordered_json test_report_json(const TestReport& report) {
  ordered_json j;
  j["method"] = method_name(report.method);
  j["statistic"] = report.statistic ? ordered_json(*report.statistic) : ordered_json(nullptr);
  j["df"] = report.df;
  j["p_value"] = report.p_value;
  j["alpha"] = report.alpha;
  j["decision"] = decision_name(report.decision);
  j["table"] = table_json(report.table);
  j["gamma_scores"] = report.gammas;
  j["delta_scores"] = report.deltas;
  j["warnings"] = report.warnings;
  return j;
}

ordered_json interval_json(const Interval& interval) {
  return ordered_json{{"low", interval.low}, {"high", interval.high}};
}

ordered_json association_json(const AssociationReport& report) {
  ordered_json j;
  j["q"] = report.q;
  j["v"] = report.v;
  j["se_q"] = report.se_q ? ordered_json(*report.se_q) : ordered_json(nullptr);
  j["se_v"] = report.se_v;
  j["ci_q"] = report.ci_q ? interval_json(*report.ci_q) : ordered_json(nullptr);
  j["ci_v"] = interval_json(report.ci_v);
  j["confidence"] = report.confidence;
  j["table"] = table_json(report.table);
  j["warnings"] = report.warnings;
  return j;
}

ordered_json classification_json(const ClassificationResult& result,
                                 const std::vector<std::string>& labels) {
  ordered_json j;
  j["winner_label"] = result.winner_label;
  j["winner_index"] = result.winner_index;
  ordered_json scores = ordered_json::array();
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    scores.push_back(ordered_json{{"label", labels[i]}, {"bits", result.scores[i]}});
  }
  j["scores"] = scores;
  j["margin_bits"] = result.margin ? ordered_json(*result.margin) : ordered_json(nullptr);
  j["length_ratio"] = result.length_ratio;
  j["ratio_warning"] =
      result.ratio_warning ? ordered_json(*result.ratio_warning) : ordered_json(nullptr);
  return j;
}

ordered_json growth_json(const DeltaGrowthReport& report) {
  ordered_json j;
  ordered_json points = ordered_json::array();
  for (const auto& point : report.points) {
    points.push_back(ordered_json{{"m", point.m}, {"mean", point.mean}, {"se", point.se}});
  }
  j["points"] = points;
  j["slope"] = report.slope;
  j["intercept"] = report.intercept;
  j["slope_se"] = report.slope_se;
  j["slope_ci"] = interval_json(report.slope_ci);
  j["confidence"] = report.confidence;
  return j;
}

ordered_json error_rate_json(const ErrorRateReport& report) {
  ordered_json j;
  j["trials"] = report.trials;
  j["events"] = report.events;
  j["rate"] = report.rate;
  j["type_i_rate"] = report.type_i_rate ? ordered_json(*report.type_i_rate) : ordered_json(nullptr);
  j["type_ii_rate"] =
      report.type_ii_rate ? ordered_json(*report.type_ii_rate) : ordered_json(nullptr);
  j["accuracy"] = report.accuracy ? ordered_json(*report.accuracy) : ordered_json(nullptr);
  j["ci_half_width"] = report.ci_half_width;
  j["confidence"] = report.confidence;
  j["trial_seeds"] = report.trial_seeds;
  return j;
}

ordered_json inputs_json(const std::vector<RawInput>& inputs) {
  ordered_json j = ordered_json::array();
  for (const auto& input : inputs) {
    j.push_back(ordered_json{{"role", input.role},
                             {"path", input.path},
                             {"records", input.records.size()},
                             {"files", input.files}});
  }
  return j;
}

std::vector<std::string> gather_warnings(const std::vector<RawInput>& inputs) {
  std::vector<std::string> warnings;
  for (const auto& input : inputs) {
    warnings.insert(warnings.end(), input.warnings.begin(), input.warnings.end());
  }
  return warnings;
}

ordered_json envelope(const std::string& command, ordered_json config, ordered_json inputs,
                      ordered_json result, const std::vector<std::string>& warnings) {
  ordered_json j;
  j["schema"] = kSchema;
  j["tool"] = ordered_json{{"name", "compstat"}, {"version", kVersion}};
  j["command"] = command;
  j["config"] = std::move(config);
  j["inputs"] = std::move(inputs);
  j["result"] = std::move(result);
  j["warnings"] = warnings;
  return j;
}

struct OutputFlags {
  std::string out_path;
  bool timings = false;
};

void add_output_flags(CLI::App* sub, OutputFlags& flags) {
  sub->add_option("--out", flags.out_path, "Write the report here instead of standard output");
  sub->add_flag("--timings", flags.timings,
                "Embed wall-clock timings (makes reports run-dependent)");
}

void emit(const ordered_json& report, const OutputFlags& flags, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (flags.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(flags.out_path, std::ios::binary);
  if (!file) throw Error(errc::io_error, "cannot write report: " + flags.out_path);
  file << text;
}

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---- subcommand payload builders ---------------------------------------------

unsigned default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

struct GroupTestOptions {
  std::string x_path, y_path;
  BackendFlags backend;
  IngestFlags ingest;
  OutputFlags output;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string split = "first";
  bool no_yates = false;
  double confidence = 0.95;  // associate only
  unsigned threads = default_threads();
};

// Shared front half of `homogeneity` and `associate`: ingest the two groups
// and run the full split/score/table pipeline.
struct GroupTestRun {
  TestReport report;
  std::vector<RawInput> inputs;
  ordered_json config;
};

GroupTestRun run_group_pipeline(const GroupTestOptions& options, const std::string& command) {
  const Tokenize mode = tokenize_mode(options.ingest.tokenize);
  const std::string delimiter = unescape(options.ingest.delimiter);
  std::vector<RawInput> raw;
  raw.push_back(load_input("x", options.x_path, mode, delimiter, false));
  raw.push_back(load_input("y", options.y_path, mode, delimiter, false));
  Corpus corpus = build_corpus(std::move(raw), mode, options.ingest.vocab_cap);

  const CompressorSpec spec = resolve_backend(options.backend);
  SampleGroup x{"x", std::move(corpus.sequences[0])};
  SampleGroup y{"y", std::move(corpus.sequences[1])};

  HomogeneityOptions test_options;
  test_options.alpha = options.alpha;
  test_options.yates = !options.no_yates;
  test_options.split =
      SplitPlan{options.split == "random" ? SplitPolicy::seeded_random : SplitPolicy::first_half,
                options.seed};

  GroupTestRun run{homogeneity_test(x, y, spec, test_options), std::move(corpus.inputs), {}};

  ordered_json config = backend_json(options.backend, spec);
  config.update(ingest_json(options.ingest));
  config["alpha"] = options.alpha;
  config["split"] = options.split;
  config["seed"] = options.seed;
  config["yates"] = !options.no_yates;
  if (command == "associate") config["confidence"] = options.confidence;
  config["alphabet_size"] = x.sequences.front().alphabet()->size();
  run.config = std::move(config);
  return run;
}

int run_homogeneity(const GroupTestOptions& options, std::ostream& out) {
  Stopwatch watch;
  GroupTestRun run = run_group_pipeline(options, "homogeneity");
  auto warnings = gather_warnings(run.inputs);
  ordered_json report = envelope("homogeneity", std::move(run.config), inputs_json(run.inputs),
                                 test_report_json(run.report), warnings);
  if (options.output.timings) report["timings"] = ordered_json{{"total_ms", watch.elapsed_ms()}};
  emit(report, options.output, out);
  return run.report.decision == Decision::reject_h0 ? 2 : 0;
}

int run_associate(const GroupTestOptions& options, std::ostream& out) {
  Stopwatch watch;
  GroupTestRun run = run_group_pipeline(options, "associate");
  const AssociationReport association = associate(run.report.table, options.confidence);
  auto warnings = gather_warnings(run.inputs);
  ordered_json result;
  result["association"] = association_json(association);
  result["homogeneity"] = test_report_json(run.report);
  ordered_json report = envelope("associate", std::move(run.config), inputs_json(run.inputs),
                                 std::move(result), warnings);
  if (options.output.timings) report["timings"] = ordered_json{{"total_ms", watch.elapsed_ms()}};
  emit(report, options.output, out);
  return 0;
}

struct ClassifyOptions {
  std::string target_path;
  std::vector<std::string> reference_paths;
  BackendFlags backend;
  IngestFlags ingest;
  OutputFlags output;
  double ratio_threshold = 0.1;
};

int run_classify(const ClassifyOptions& options, std::ostream& out) {
  Stopwatch watch;
  const Tokenize mode = tokenize_mode(options.ingest.tokenize);
  std::vector<RawInput> raw;
  raw.push_back(load_input("target", options.target_path, mode, "", true));
  std::vector<std::string> labels;
  for (const auto& path : options.reference_paths) {
    std::string label = fs::path(path).stem().string();
    if (label.empty()) label = path;
    labels.push_back(label);
    raw.push_back(load_input(label, path, mode, "", true));
  }
  Corpus corpus = build_corpus(std::move(raw), mode, options.ingest.vocab_cap);

  TrainingBank bank;
  bank.spec = resolve_backend(options.backend);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    // directory references: one sequence per file, concatenated in file order
    bank.classes.push_back(TrainingBank::Entry{labels[i], concat(corpus.sequences[i + 1])});
  }
  const Sequence target = concat(corpus.sequences[0]);
  const ClassificationResult result = classify(target, bank, options.ratio_threshold);

  ordered_json config = backend_json(options.backend, bank.spec);
  config.update(ingest_json(options.ingest));
  config["ratio_threshold"] = options.ratio_threshold;
  config["alphabet_size"] = target.alphabet()->size();
  auto warnings = gather_warnings(corpus.inputs);
  ordered_json report = envelope("classify", std::move(config), inputs_json(corpus.inputs),
                                 classification_json(result, labels), warnings);
  if (options.output.timings) report["timings"] = ordered_json{{"total_ms", watch.elapsed_ms()}};
  emit(report, options.output, out);
  return 0;
}

struct SimulateOptions {
  std::string config_path;
  OutputFlags output;
  unsigned threads = default_threads();
  bool threads_given = false;
};

ordered_json experiment_config_json(const NamedExperiment& experiment) {
  ordered_json j;
  std::visit(
      [&](const auto& config) {
        using T = std::decay_t<decltype(config)>;
        j["backend"] = describe(config.codec);
        j["trials"] = config.trials;
        j["seed"] = config.seed;
        j["confidence"] = config.confidence;
        j["threads"] = config.threads;
        if constexpr (std::is_same_v<T, DeltaGrowthConfig>) {
          j["m_grid"] = config.m_grid;
          j["context_length"] = config.context_length;
        } else if constexpr (std::is_same_v<T, HomogeneityErrorConfig>) {
          j["sequences_per_group"] = config.sequences_per_group;
          j["sequence_length"] = config.sequence_length;
          j["alpha"] = config.alpha;
          j["split"] = config.split_policy == SplitPolicy::seeded_random ? "random" : "first";
        } else if constexpr (std::is_same_v<T, ClassificationExperimentConfig>) {
          ordered_json sources = ordered_json::array();
          for (const auto& source : config.sources) sources.push_back(source.label);
          j["sources"] = sources;
          j["reference_length"] = config.reference_length;
          j["target_length"] = config.target_length;
        }
      },
      experiment.config);
  return j;
}

int run_simulate(const SimulateOptions& options, std::ostream& out) {
  Stopwatch watch;
  const auto bytes = read_bytes(options.config_path);
  ModelFile file = load_model_file(options.config_path);
  if (file.experiments.empty()) {
    throw Error(errc::domain_error, "config defines no experiments: " + options.config_path);
  }

  ordered_json experiments = ordered_json::array();
  for (auto& experiment : file.experiments) {
    if (options.threads_given) {
      std::visit([&](auto& config) { config.threads = options.threads; }, experiment.config);
    }
    ordered_json entry;
    entry["name"] = experiment.name;
    entry["kind"] = experiment.kind;
    entry["config"] = experiment_config_json(experiment);
    entry["report"] = std::visit(
        [](const auto& config) -> ordered_json {
          using T = std::decay_t<decltype(config)>;
          if constexpr (std::is_same_v<T, DeltaGrowthConfig>) {
            return growth_json(delta_growth_experiment(config));
          } else if constexpr (std::is_same_v<T, HomogeneityErrorConfig>) {
            return error_rate_json(homogeneity_error_experiment(config));
          } else {
            return error_rate_json(classification_experiment(config));
          }
        },
        experiment.config);
    experiments.push_back(std::move(entry));
  }

  ordered_json config;
  config["config_path"] = options.config_path;
  config["models"] = [&] {
    ordered_json names = ordered_json::array();
    for (const auto& [name, model] : file.models) {
      (void)model;
      names.push_back(name);
    }
    return names;
  }();
  ordered_json inputs = ordered_json::array();
  inputs.push_back(ordered_json{{"role", "config"},
                                {"path", options.config_path},
                                {"files", ordered_json::array({ordered_json{
                                              {"name", fs::path(options.config_path).filename().string()},
                                              {"bytes", bytes.size()},
                                              {"digest", "fnv1a64:" + fnv1a64_hex(bytes)}}})}});
  ordered_json report = envelope("simulate", std::move(config), std::move(inputs),
                                 ordered_json{{"experiments", experiments}}, {});
  if (options.output.timings) report["timings"] = ordered_json{{"total_ms", watch.elapsed_ms()}};
  emit(report, options.output, out);
  return 0;
}

// ---- selftest -----------------------------------------------------------------

int run_selftest(std::ostream& out) {
  std::size_t passed = 0, total = 0;
  auto check = [&](const std::string& name, bool ok) {
    ++total;
    passed += ok ? 1 : 0;
    out << (ok ? "ok " : "FAIL ") << name << "\n";
  };
  const auto binary = std::make_shared<Alphabet>(Alphabet::binary());

  bool kraft_ppm = true;
  for (int order = 0; order <= 2; ++order) {
    for (std::size_t n = 1; n <= 6; ++n) {
      kraft_ppm &= std::fabs(kraft_sum(PpmSpec{order}, n, binary) - 1.0) <= 1e-9;
    }
  }
  check("kraft sum: ppm orders 0-2 equal 1", kraft_ppm);

  bool kraft_sub = true;
  for (std::size_t n = 1; n <= 8; ++n) {
    kraft_sub &= kraft_sum(Lz78Spec{}, n, binary) <= 1.0 + 1e-9;
  }
  for (std::size_t n = 1; n <= 6; ++n) {
    kraft_sub &= kraft_sum(BwtSpec{}, n, binary) <= 1.0 + 1e-9;
  }
  check("kraft sum: lz78 and bwt at most 1", kraft_sub);

  const std::vector<CompressorSpec> backends = {Lz78Spec{}, PpmSpec{0}, PpmSpec{3}, BwtSpec{}};
  bool additive = true, positive = true;
  std::mt19937_64 rng(17);
  for (const auto& spec : backends) {
    for (int pair = 0; pair < 100; ++pair) {
      const auto draw = [&](std::size_t len) {
        std::vector<Symbol> data(len);
        for (auto& s : data) s = static_cast<Symbol>(rng() & 1);
        return Sequence(binary, std::move(data));
      };
      const Sequence u = draw(64 + rng() % 193), v = draw(64 + rng() % 193);
      const double whole = compress_length(spec, concat(u, v)).bits;
      const double context = compress_length(spec, u).bits;
      const double conditional = conditional_length(spec, v, u).bits;
      additive &= std::fabs(whole - context - conditional) <= 1e-9;
      positive &= conditional > 0.0;
    }
  }
  check("conditional lengths: additive", additive);
  check("conditional lengths: positive", positive);

  const auto chi = chi_square_2x2(ContingencyTable::make_2x2(30, 10, 10, 30), 0.05, false);
  check("chi-square (30,10,10,30) = 20",
        chi.statistic && std::fabs(*chi.statistic - 20.0) <= 1e-9);
  const auto yates = chi_square_2x2(ContingencyTable::make_2x2(10, 0, 0, 10), 0.05, true);
  check("yates (10,0,0,10) = 16.2", yates.statistic && std::fabs(*yates.statistic - 16.2) <= 1e-9);
  const double fisher = fisher_exact_2x2(ContingencyTable::make_2x2(10, 0, 0, 10));
  check("fisher (10,0,0,10)", std::fabs(fisher - 1.082508822446903e-05) <= 1e-12);

  const auto table = ContingencyTable::make_2x2(40, 10, 10, 40);
  check("yule q (40,10,10,40)", std::fabs(yule_q(table) - 0.8823529411764706) <= 1e-9);
  check("coefficient v (40,10,10,40)", std::fabs(coefficient_v(table) - 0.6) <= 1e-9);
  const auto se = standard_errors(table);
  check("q standard error",
        se.se_q && std::fabs(*se.se_q - 0.055363321799307974) <= 1e-9);

  check("entropy: fair coin", entropy_m(bernoulli_model(0.5), 0) == 1.0);
  check("entropy: bern(0.2)",
        std::fabs(entropy_m(bernoulli_model(0.2), 0) - 0.7219280948873623) <= 1e-9);
  check("kl divergence pin",
        std::fabs(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{0.25, 0.75}) -
                  0.20751874963942185) <= 1e-9);

  const auto s1 = generate(binary_flip_model(0.1), 1000, 99);
  const auto s2 = generate(binary_flip_model(0.1), 1000, 99);
  bool same = s1.size() == s2.size();
  for (std::size_t i = 0; same && i < s1.size(); ++i) same = s1[i] == s2[i];
  check("generation: deterministic", same);

  out << "selftest: " << passed << "/" << total << " ok\n";
  return passed == total ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compression-based statistics: homogeneity testing, association, "
               "classification, and Monte Carlo validation"};
  app.set_version_flag("--version", std::string("compstat ") + kVersion);
  app.require_subcommand(1);

  GroupTestOptions group_options;
  auto* homogeneity = app.add_subcommand(
      "homogeneity", "Test whether two groups of sequences come from one source");
  homogeneity->add_option("x", group_options.x_path, "First group (directory or delimited file)")
      ->required();
  homogeneity->add_option("y", group_options.y_path, "Second group (directory or delimited file)")
      ->required();
  add_backend_flags(homogeneity, group_options.backend);
  add_ingest_flags(homogeneity, group_options.ingest);
  add_output_flags(homogeneity, group_options.output);
  homogeneity->add_option("--alpha", group_options.alpha, "Test level")->capture_default_str();
  homogeneity->add_option("--seed", group_options.seed, "Master RNG seed")->capture_default_str();
  homogeneity->add_option("--split", group_options.split, "Reference/held-out split policy")
      ->check(CLI::IsMember({"first", "random"}))
      ->capture_default_str();
  homogeneity->add_flag("--no-yates", group_options.no_yates,
                        "Disable the continuity correction");
  homogeneity->add_option("--threads", group_options.threads, "Worker thread bound");

  GroupTestOptions associate_options;
  auto* associate_cmd =
      app.add_subcommand("associate", "Association coefficients over the homogeneity table");
  associate_cmd->add_option("x", associate_options.x_path, "First group")->required();
  associate_cmd->add_option("y", associate_options.y_path, "Second group")->required();
  add_backend_flags(associate_cmd, associate_options.backend);
  add_ingest_flags(associate_cmd, associate_options.ingest);
  add_output_flags(associate_cmd, associate_options.output);
  associate_cmd->add_option("--alpha", associate_options.alpha, "Test level")
      ->capture_default_str();
  associate_cmd->add_option("--seed", associate_options.seed, "Master RNG seed")
      ->capture_default_str();
  associate_cmd->add_option("--split", associate_options.split, "Split policy")
      ->check(CLI::IsMember({"first", "random"}))
      ->capture_default_str();
  associate_cmd->add_option("--confidence", associate_options.confidence,
                            "Confidence level for the intervals")
      ->capture_default_str();
  associate_cmd->add_option("--threads", associate_options.threads, "Worker thread bound");

  ClassifyOptions classify_options;
  auto* classify_cmd =
      app.add_subcommand("classify", "Assign a sequence to the closest reference class");
  classify_cmd->add_option("target", classify_options.target_path, "Sequence to classify")
      ->required();
  classify_cmd
      ->add_option("references", classify_options.reference_paths,
                   "One reference file or directory per class")
      ->required()
      ->expected(-1);
  add_backend_flags(classify_cmd, classify_options.backend);
  add_ingest_flags(classify_cmd, classify_options.ingest);
  add_output_flags(classify_cmd, classify_options.output);
  classify_cmd
      ->add_option("--ratio-threshold", classify_options.ratio_threshold,
                   "Warn when |target|/min |reference| exceeds this")
      ->capture_default_str();

  SimulateOptions simulate_options;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Run Monte Carlo experiments from a model file");
  simulate_cmd->add_option("--config", simulate_options.config_path, "Model/experiment file")
      ->required();
  add_output_flags(simulate_cmd, simulate_options.output);
  auto* threads_option =
      simulate_cmd->add_option("--threads", simulate_options.threads, "Worker thread bound");

  auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in verification battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    ordered_json error;
    error["error"] = ordered_json{{"code", "usage_error"}, {"message", e.what()}};
    err << error.dump(2) << "\n";
    return 1;
  }

  const auto check_unit_interval = [](double value, const char* flag) {
    if (!(value > 0.0 && value < 1.0)) {
      throw Error(errc::usage_error, std::string(flag) + " must be strictly between 0 and 1");
    }
  };

  try {
    if (app.got_subcommand(homogeneity)) {
      check_unit_interval(group_options.alpha, "--alpha");
      return run_homogeneity(group_options, out);
    }
    if (app.got_subcommand(associate_cmd)) {
      check_unit_interval(associate_options.alpha, "--alpha");
      check_unit_interval(associate_options.confidence, "--confidence");
      return run_associate(associate_options, out);
    }
    if (app.got_subcommand(classify_cmd)) return run_classify(classify_options, out);
    if (app.got_subcommand(simulate_cmd)) {
      simulate_options.threads_given = threads_option->count() > 0;
      return run_simulate(simulate_options, out);
    }
    if (app.got_subcommand(selftest_cmd)) return run_selftest(out);
    throw Error(errc::usage_error, "no subcommand selected");
  } catch (const Error& e) {
    ordered_json error;
    error["error"] = ordered_json{{"code", errc_name(e.code())}, {"message", e.what()}};
    err << error.dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    ordered_json error;
    error["error"] = ordered_json{{"code", "internal_error"}, {"message", e.what()}};
    err << error.dump(2) << "\n";
    return 1;
  }
}

}  // namespace compstat::cli
