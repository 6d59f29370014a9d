#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "compstat/codec.hpp"
#include "compstat/types.hpp"

namespace compstat {

/// Labeled reference samples, one per candidate source, scored with a shared
/// backend.
struct TrainingBank {
  struct Entry {
    std::string label;
    Sequence reference;
  };
  std::vector<Entry> classes;
  CompressorSpec spec;
};

/// At least one class, nonempty references, one shared alphabet.
void validate_bank(const TrainingBank& bank);

struct ClassificationResult {
  std::string winner_label;
  std::size_t winner_index = 0;
  std::vector<double> scores;           // conditional code length per class, bits
  std::optional<double> margin;         // runner-up minus winner; absent with one class
  double length_ratio = 0.0;            // |u| / shortest reference length
  std::optional<std::string> ratio_warning;
};

/// The target-to-reference length ratio should be small for the scores to be
/// trustworthy; returns a warning when it exceeds the threshold.
std::optional<std::string> check_length_ratio(const Sequence& u, const TrainingBank& bank,
                                              double threshold = 0.1);

/// Assign u to the class whose reference gives the minimum conditional code
/// length; ties go to the lowest class index.
ClassificationResult classify(const Sequence& u, const TrainingBank& bank,
                              double ratio_threshold = 0.1);

}  // namespace compstat
