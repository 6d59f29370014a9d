#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "compstat/experiments.hpp"
#include "compstat/markov.hpp"

namespace compstat {

using ExperimentConfig =
    std::variant<DeltaGrowthConfig, HomogeneityErrorConfig, ClassificationExperimentConfig>;

struct NamedExperiment {
  std::string name;
  std::string kind;  // delta_growth | homogeneity_error | classification
  ExperimentConfig config;
};

/// Parsed declarative source/experiment file: named Markov models plus the
/// experiments that reference them, in file order.
struct ModelFile {
  std::vector<std::pair<std::string, MarkovModel>> models;
  std::vector<NamedExperiment> experiments;
};

/// Looks a model up by name; throws domain_error when absent.
const MarkovModel& find_model(const ModelFile& file, const std::string& name);

/// Parses the plain text format documented in docs/model-format.md.
ModelFile parse_model_text(const std::string& text);

/// Reads and parses a file; io_error when unreadable.
ModelFile load_model_file(const std::filesystem::path& path);

/// Backend selector tokens: "lz78" | "ppm [N]" | "bwt [BLOCK]" |
/// "external CMD..." (remaining tokens joined by single spaces).
CompressorSpec parse_backend_tokens(const std::vector<std::string>& tokens);

}  // namespace compstat
