#include "compstat/model_format.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace compstat {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw Error(errc::parse_error, "line " + std::to_string(line) + ": " + message);
}

struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream stream(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(stream, raw)) {
    ++number;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    Line line{number, {}};
    std::string token;
    while (words >> token) line.tokens.push_back(token);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

double parse_real(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    fail(line, "expected a number, got \"" + token + "\"");
  }
  if (used != token.size()) fail(line, "expected a number, got \"" + token + "\"");
  return value;
}

std::uint64_t parse_uint(const std::string& token, std::size_t line) {
  if (token.empty() || token[0] == '-') fail(line, "expected a nonnegative integer, got \"" + token + "\"");
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(token, &used);
  } catch (const std::exception&) {
    fail(line, "expected a nonnegative integer, got \"" + token + "\"");
  }
  if (used != token.size()) fail(line, "expected a nonnegative integer, got \"" + token + "\"");
  return value;
}

bool structural(const std::string& token) {
  return token == "{" || token == "}" || token == ":";
}

// Raw key/value lines of one block, before semantic checks.
struct Block {
  std::string type;  // "model" or "experiment"
  std::string name;
  std::size_t line = 0;
  std::vector<Line> entries;
};

std::vector<Block> split_blocks(const std::vector<Line>& lines) {
  std::vector<Block> blocks;
  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& head = lines[i];
    if (head.tokens.size() != 3 || structural(head.tokens[1]) || head.tokens[2] != "{") {
      fail(head.number, "expected `model NAME {` or `experiment NAME {`");
    }
    if (head.tokens[0] != "model" && head.tokens[0] != "experiment") {
      fail(head.number, "unknown block type \"" + head.tokens[0] + "\"");
    }
    Block block{head.tokens[0], head.tokens[1], head.number, {}};
    ++i;
    bool closed = false;
    while (i < lines.size()) {
      if (lines[i].tokens.size() == 1 && lines[i].tokens[0] == "}") {
        closed = true;
        ++i;
        break;
      }
      block.entries.push_back(lines[i]);
      ++i;
    }
    if (!closed) fail(head.number, "block \"" + block.name + "\" is never closed");
    blocks.push_back(std::move(block));
  }
  return blocks;
}

MarkovModel build_model(const Block& block) {
  AlphabetRef alphabet;
  std::optional<unsigned> order;
  struct Row {
    std::size_t line;
    std::vector<std::string> context;
    std::vector<double> probabilities;
  };
  std::vector<Row> rows;
  std::vector<double> initial;

  for (const Line& entry : block.entries) {
    const std::string& key = entry.tokens[0];
    if (key == "alphabet") {
      if (alphabet) fail(entry.number, "alphabet given twice");
      std::vector<std::string> tokens(entry.tokens.begin() + 1, entry.tokens.end());
      for (const auto& t : tokens) {
        if (structural(t)) fail(entry.number, "\"" + t + "\" cannot be an alphabet token");
      }
      if (tokens.size() < 2) fail(entry.number, "alphabet needs at least 2 tokens");
      alphabet = std::make_shared<Alphabet>(Alphabet(tokens));
    } else if (key == "order") {
      if (entry.tokens.size() != 2) fail(entry.number, "order takes exactly one value");
      order = static_cast<unsigned>(parse_uint(entry.tokens[1], entry.number));
    } else if (key == "row") {
      const auto colon = std::find(entry.tokens.begin(), entry.tokens.end(), ":");
      if (colon == entry.tokens.end()) fail(entry.number, "row needs `:` before the probabilities");
      Row row{entry.number, {entry.tokens.begin() + 1, colon}, {}};
      for (auto it = colon + 1; it != entry.tokens.end(); ++it) {
        row.probabilities.push_back(parse_real(*it, entry.number));
      }
      rows.push_back(std::move(row));
    } else if (key == "initial") {
      if (!initial.empty()) fail(entry.number, "initial given twice");
      for (std::size_t i = 1; i < entry.tokens.size(); ++i) {
        initial.push_back(parse_real(entry.tokens[i], entry.number));
      }
      if (initial.empty()) fail(entry.number, "initial needs probabilities");
    } else {
      fail(entry.number, "unknown model key \"" + key + "\"");
    }
  }

  if (!alphabet) fail(block.line, "model \"" + block.name + "\" has no alphabet");
  if (!order) fail(block.line, "model \"" + block.name + "\" has no order");

  MarkovModel model;
  model.alphabet = alphabet;
  model.order = *order;
  const std::size_t a = alphabet->size();
  std::size_t contexts = 1;
  for (unsigned i = 0; i < *order; ++i) {
    if (contexts > (std::size_t{1} << 20) / a) {
      fail(block.line, "model \"" + block.name + "\" has too many contexts");
    }
    contexts *= a;
  }
  model.transition.assign(contexts * a, 0.0);
  std::vector<bool> seen(contexts, false);

  for (const Row& row : rows) {
    if (row.context.size() != *order) {
      fail(row.line, "row context needs exactly " + std::to_string(*order) + " tokens");
    }
    std::size_t index = 0;
    for (const auto& token : row.context) {
      const auto symbol = alphabet->find(token);
      if (!symbol) fail(row.line, "token \"" + token + "\" is not in the alphabet");
      index = index * a + *symbol;
    }
    if (seen[index]) fail(row.line, "duplicate row for this context");
    seen[index] = true;
    if (row.probabilities.size() != a) {
      fail(row.line, "row needs " + std::to_string(a) + " probabilities");
    }
    std::copy(row.probabilities.begin(), row.probabilities.end(),
              model.transition.begin() + static_cast<std::ptrdiff_t>(index * a));
  }
  for (std::size_t i = 0; i < contexts; ++i) {
    if (!seen[i]) fail(block.line, "model \"" + block.name + "\" is missing a transition row");
  }
  if (!initial.empty()) model.initial = std::move(initial);

  try {
    validate(model);
  } catch (const Error& e) {
    throw Error(errc::parse_error,
                "model \"" + block.name + "\" (line " + std::to_string(block.line) +
                    "): " + e.what());
  }
  return model;
}

// One key -> value tokens lookup over an experiment block, with usage checks.
class EntryMap {
 public:
  EntryMap(const Block& block) : block_(block) {
    for (const Line& entry : block.entries) {
      if (!map_.emplace(entry.tokens[0], &entry).second) {
        fail(entry.number, "key \"" + entry.tokens[0] + "\" given twice");
      }
    }
  }

  const Line* find(const std::string& key) {
    const auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    used_.push_back(key);
    return it->second;
  }

  const Line& require(const std::string& key) {
    const Line* entry = find(key);
    if (!entry) fail(block_.line, "experiment \"" + block_.name + "\" needs key \"" + key + "\"");
    return *entry;
  }

  std::vector<std::string> values(const Line& entry) const {
    return {entry.tokens.begin() + 1, entry.tokens.end()};
  }

  std::string single(const std::string& key) {
    const Line& entry = require(key);
    if (entry.tokens.size() != 2) fail(entry.number, "key \"" + key + "\" takes exactly one value");
    return entry.tokens[1];
  }

  std::optional<std::uint64_t> uint(const std::string& key) {
    const Line* entry = find(key);
    if (!entry) return std::nullopt;
    if (entry->tokens.size() != 2) fail(entry->number, "key \"" + key + "\" takes exactly one value");
    return parse_uint(entry->tokens[1], entry->number);
  }

  std::optional<double> real(const std::string& key) {
    const Line* entry = find(key);
    if (!entry) return std::nullopt;
    if (entry->tokens.size() != 2) fail(entry->number, "key \"" + key + "\" takes exactly one value");
    return parse_real(entry->tokens[1], entry->number);
  }

  void reject_unused() const {
    for (const Line& entry : block_.entries) {
      if (std::find(used_.begin(), used_.end(), entry.tokens[0]) == used_.end()) {
        fail(entry.number, "unknown key \"" + entry.tokens[0] + "\" for this experiment kind");
      }
    }
  }

 private:
  const Block& block_;
  std::map<std::string, const Line*> map_;
  std::vector<std::string> used_;
};

const MarkovModel& resolve_model(const ModelFile& file, const std::string& name,
                                 std::size_t line) {
  for (const auto& [model_name, model] : file.models) {
    if (model_name == name) return model;
  }
  fail(line, "unknown model \"" + name + "\"");
}

NamedExperiment build_experiment(const Block& block, const ModelFile& file) {
  EntryMap entries(block);
  const std::string kind = entries.single("kind");

  CompressorSpec codec = PpmSpec{3};
  if (const Line* backend = entries.find("backend")) {
    codec = parse_backend_tokens(entries.values(*backend));
  }
  const std::uint64_t seed = parse_uint(entries.single("seed"), block.line);
  const auto threads = entries.uint("threads");
  const auto confidence = entries.real("confidence");
  const auto trials = entries.uint("trials");

  NamedExperiment experiment{block.name, kind, DeltaGrowthConfig{}};
  if (kind == "delta_growth") {
    DeltaGrowthConfig config;
    config.codec = codec;
    const Line& x = entries.require("x");
    const Line& y = entries.require("y");
    config.model_x = resolve_model(file, entries.single("x"), x.number);
    config.model_y = resolve_model(file, entries.single("y"), y.number);
    const Line& grid = entries.require("m_grid");
    config.m_grid.clear();
    for (const auto& token : entries.values(grid)) {
      config.m_grid.push_back(parse_uint(token, grid.number));
    }
    if (const auto v = entries.uint("context_length")) config.context_length = *v;
    if (trials) config.trials = *trials;
    config.seed = seed;
    if (confidence) config.confidence = *confidence;
    if (threads) config.threads = static_cast<unsigned>(*threads);
    experiment.config = std::move(config);
  } else if (kind == "homogeneity_error") {
    HomogeneityErrorConfig config;
    config.codec = codec;
    const Line& x = entries.require("x");
    const Line& y = entries.require("y");
    config.model_x = resolve_model(file, entries.single("x"), x.number);
    config.model_y = resolve_model(file, entries.single("y"), y.number);
    if (const auto v = entries.uint("sequences_per_group")) config.sequences_per_group = *v;
    if (const auto v = entries.uint("sequence_length")) config.sequence_length = *v;
    if (trials) config.trials = *trials;
    if (const auto v = entries.real("alpha")) config.alpha = *v;
    if (const Line* policy = entries.find("split")) {
      const auto tokens = entries.values(*policy);
      if (tokens.size() != 1 || (tokens[0] != "first" && tokens[0] != "random")) {
        fail(policy->number, "split must be `first` or `random`");
      }
      config.split_policy =
          tokens[0] == "first" ? SplitPolicy::first_half : SplitPolicy::seeded_random;
    }
    config.seed = seed;
    if (confidence) config.confidence = *confidence;
    if (threads) config.threads = static_cast<unsigned>(*threads);
    experiment.config = std::move(config);
  } else if (kind == "classification") {
    ClassificationExperimentConfig config;
    config.codec = codec;
    const Line& sources = entries.require("sources");
    for (const auto& name : entries.values(sources)) {
      config.sources.push_back({name, resolve_model(file, name, sources.number)});
    }
    if (config.sources.empty()) fail(sources.number, "sources needs at least one model name");
    if (const auto v = entries.uint("reference_length")) config.reference_length = *v;
    if (const auto v = entries.uint("target_length")) config.target_length = *v;
    if (trials) config.trials = *trials;
    config.seed = seed;
    if (confidence) config.confidence = *confidence;
    if (threads) config.threads = static_cast<unsigned>(*threads);
    experiment.config = std::move(config);
  } else {
    fail(block.line, "unknown experiment kind \"" + kind + "\"");
  }
  entries.reject_unused();
  return experiment;
}

}  // namespace

const MarkovModel& find_model(const ModelFile& file, const std::string& name) {
  for (const auto& [model_name, model] : file.models) {
    if (model_name == name) return model;
  }
  throw Error(errc::domain_error, "unknown model \"" + name + "\"");
}

ModelFile parse_model_text(const std::string& text) {
  const auto blocks = split_blocks(tokenize(text));
  ModelFile file;
  for (const Block& block : blocks) {
    if (block.type != "model") continue;
    for (const auto& [name, model] : file.models) {
      (void)model;
      if (name == block.name) fail(block.line, "duplicate model name \"" + block.name + "\"");
    }
    file.models.emplace_back(block.name, build_model(block));
  }
  for (const Block& block : blocks) {
    if (block.type != "experiment") continue;
    for (const auto& existing : file.experiments) {
      if (existing.name == block.name) {
        fail(block.line, "duplicate experiment name \"" + block.name + "\"");
      }
    }
    file.experiments.push_back(build_experiment(block, file));
  }
  return file;
}

ModelFile load_model_file(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw Error(errc::io_error, "cannot read model file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return parse_model_text(buffer.str());
}

CompressorSpec parse_backend_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty()) {
    throw Error(errc::usage_error, "backend selector is empty");
  }
  const std::string& name = tokens[0];
  if (name == "lz78") {
    if (tokens.size() != 1) throw Error(errc::usage_error, "lz78 takes no parameters");
    return Lz78Spec{};
  }
  if (name == "ppm") {
    PpmSpec spec;
    if (tokens.size() > 2) throw Error(errc::usage_error, "ppm takes at most one parameter");
    if (tokens.size() == 2) {
      try {
        spec.order = std::stoi(tokens[1]);
      } catch (const std::exception&) {
        throw Error(errc::usage_error, "ppm order must be an integer");
      }
    }
    return spec;
  }
  if (name == "bwt") {
    BwtSpec spec;
    if (tokens.size() > 2) throw Error(errc::usage_error, "bwt takes at most one parameter");
    if (tokens.size() == 2) {
      try {
        spec.block_size = std::stoull(tokens[1]);
      } catch (const std::exception&) {
        throw Error(errc::usage_error, "bwt block size must be an integer");
      }
    }
    return spec;
  }
  if (name == "external") {
    if (tokens.size() < 2) {
      throw Error(errc::usage_error, "external backend needs a command");
    }
    std::string command = tokens[1];
    for (std::size_t i = 2; i < tokens.size(); ++i) command += " " + tokens[i];
    return ExternalSpec{command};
  }
  throw Error(errc::usage_error, "unknown backend \"" + name + "\"");
}

}  // namespace compstat
