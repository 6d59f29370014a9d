#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "compstat/codec.hpp"
#include "compstat/homogeneity.hpp"
#include "compstat/markov.hpp"
#include "compstat/types.hpp"

namespace compstat {

// ---- Discrimination growth ------------------------------------------------
//
// For target lengths m over a grid, estimates E[len(w|y-context) - len(w|x-context)]
// with w drawn from the x source, then fits a line in m. When the sources
// differ the slope approaches the per-symbol divergence rate; when they are
// equal it sits at zero.

struct DeltaGrowthConfig {
  MarkovModel model_x;
  MarkovModel model_y;
  CompressorSpec codec;
  std::vector<std::size_t> m_grid;  // target lengths; at least two distinct values
  std::size_t context_length = 10000;
  std::size_t trials = 100;  // per grid point
  std::uint64_t seed = 0;
  double confidence = 0.99;
  unsigned threads = 1;
};

struct DeltaGrowthPoint {
  std::size_t m = 0;
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean over trials
};

struct DeltaGrowthReport {
  std::vector<DeltaGrowthPoint> points;  // ascending in m
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  Interval slope_ci{};
  double confidence = 0.99;
};

DeltaGrowthReport delta_growth_experiment(const DeltaGrowthConfig& config);

// ---- Error-rate trials ------------------------------------------------------

/// Shared result shape for repeated-trial experiments. Exactly one of
/// type_i_rate / type_ii_rate / accuracy is set, depending on the experiment;
/// `rate` mirrors it and the binomial CI half-width applies to it.
struct ErrorRateReport {
  std::size_t trials = 0;
  std::size_t events = 0;  // rejections, retains, or correct classifications
  double rate = 0.0;
  std::optional<double> type_i_rate;
  std::optional<double> type_ii_rate;
  std::optional<double> accuracy;
  double ci_half_width = 0.0;
  double confidence = 0.99;
  std::vector<std::uint64_t> trial_seeds;
};

struct HomogeneityErrorConfig {
  MarkovModel model_x;
  MarkovModel model_y;
  CompressorSpec codec;
  std::size_t sequences_per_group = 20;
  std::size_t sequence_length = 5000;
  std::size_t trials = 400;
  double alpha = 0.05;
  SplitPolicy split_policy = SplitPolicy::first_half;
  std::uint64_t seed = 0;
  double confidence = 0.99;
  unsigned threads = 1;
};

/// Repeated homogeneity tests on freshly generated groups. Identical models
/// make rejections Type I errors; distinct models make retentions Type II.
ErrorRateReport homogeneity_error_experiment(const HomogeneityErrorConfig& config);

struct ClassificationExperimentConfig {
  struct Source {
    std::string label;
    MarkovModel model;
  };
  std::vector<Source> sources;
  CompressorSpec codec;
  std::size_t reference_length = 100000;
  std::size_t target_length = 4000;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  double confidence = 0.99;
  unsigned threads = 1;
};

/// Repeated classification with fresh references and targets each trial; the
/// true class cycles round-robin so every source is tested equally often.
ErrorRateReport classification_experiment(const ClassificationExperimentConfig& config);

}  // namespace compstat
