#include "compstat/classify.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace compstat {

void validate_bank(const TrainingBank& bank) {
  if (bank.classes.empty()) {
    throw Error(errc::domain_error, "training bank needs at least one class");
  }
  for (const auto& entry : bank.classes) {
    if (entry.reference.empty()) {
      throw Error(errc::domain_error,
                  "class \"" + entry.label + "\" has an empty reference sequence");
    }
    if (!same_alphabet(entry.reference.alphabet(), bank.classes.front().reference.alphabet())) {
      throw Error(errc::domain_error, "training bank mixes alphabets");
    }
  }
}

namespace {

double length_ratio_of(const Sequence& u, const TrainingBank& bank) {
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& entry : bank.classes) shortest = std::min(shortest, entry.reference.size());
  return static_cast<double>(u.size()) / static_cast<double>(shortest);
}

}  // namespace

std::optional<std::string> check_length_ratio(const Sequence& u, const TrainingBank& bank,
                                              double threshold) {
  validate_bank(bank);
  const double ratio = length_ratio_of(u, bank);
  if (ratio <= threshold) return std::nullopt;
  std::ostringstream message;
  message << "target/reference length ratio " << ratio << " exceeds " << threshold
          << "; scores assume references much longer than the target";
  return message.str();
}

ClassificationResult classify(const Sequence& u, const TrainingBank& bank,
                              double ratio_threshold) {
  validate_bank(bank);
  if (u.empty()) {
    throw Error(errc::domain_error, "cannot classify an empty sequence");
  }
  if (!same_alphabet(u.alphabet(), bank.classes.front().reference.alphabet())) {
    throw Error(errc::domain_error, "target and training bank use different alphabets");
  }

  ClassificationResult result;
  result.scores.reserve(bank.classes.size());
  for (const auto& entry : bank.classes) {
    result.scores.push_back(conditional_length(bank.spec, u, entry.reference).bits);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.scores.size(); ++i) {
    if (result.scores[i] < result.scores[best]) best = i;
  }
  result.winner_index = best;
  result.winner_label = bank.classes[best].label;
  if (result.scores.size() > 1) {
    double runner_up = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.scores.size(); ++i) {
      if (i != best) runner_up = std::min(runner_up, result.scores[i]);
    }
    result.margin = runner_up - result.scores[best];
  }
  result.length_ratio = length_ratio_of(u, bank);
  result.ratio_warning = check_length_ratio(u, bank, ratio_threshold);
  return result;
}

}  // namespace compstat
