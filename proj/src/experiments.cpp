#include "compstat/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "compstat/classify.hpp"
#include "compstat/rng.hpp"
#include "compstat/stats.hpp"
#include "parallel.hpp"

namespace compstat {

namespace {

void check_confidence(double confidence) {
  if (!(confidence > 0.0) || !(confidence < 1.0)) {
    throw Error(errc::domain_error, "confidence level must lie in (0, 1)");
  }
}

void check_model_pair(const MarkovModel& x, const MarkovModel& y) {
  validate(x);
  validate(y);
  if (!same_alphabet(x.alphabet, y.alphabet)) {
    throw Error(errc::domain_error, "the two source models use different alphabets");
  }
}

double binomial_half_width(std::size_t events, std::size_t trials, double confidence) {
  const double p = static_cast<double>(events) / static_cast<double>(trials);
  return stats::z_for_confidence(confidence) *
         std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace

DeltaGrowthReport delta_growth_experiment(const DeltaGrowthConfig& config) {
  check_model_pair(config.model_x, config.model_y);
  check_confidence(config.confidence);
  if (config.context_length < 1) {
    throw Error(errc::domain_error, "context length must be >= 1");
  }
  if (config.trials < 2) {
    throw Error(errc::domain_error, "need at least 2 trials to estimate point errors");
  }
  std::vector<std::size_t> grid = config.m_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 2) {
    throw Error(errc::domain_error, "need at least 2 distinct target lengths for a line fit");
  }
  if (grid.front() < 1) {
    throw Error(errc::domain_error, "target lengths must be >= 1");
  }

  const std::size_t points = grid.size();
  const std::size_t m_max = grid.back();
  // deltas[trial * points + p]; each trial scores the prefixes of one target
  // so the streamed context work is paid once per trial, not once per length
  std::vector<double> deltas(config.trials * points);
  detail::parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);
    const Sequence x_ctx =
        generate(config.model_x, config.context_length, derive_seed(trial_seed, 0));
    const Sequence y_ctx =
        generate(config.model_y, config.context_length, derive_seed(trial_seed, 1));
    const Sequence w = generate(config.model_x, m_max, derive_seed(trial_seed, 2));

    const auto codec = make_codec(config.codec, x_ctx.alphabet());
    auto state_x = codec->start();
    state_x->feed(x_ctx);
    const double base_x = state_x->bits();
    auto state_y = codec->start();
    state_y->feed(y_ctx);
    const double base_y = state_y->bits();

    std::size_t fed = 0;
    for (std::size_t p = 0; p < points; ++p) {
      const auto chunk = w.data().subspan(fed, grid[p] - fed);
      state_x->feed(chunk);
      state_y->feed(chunk);
      fed = grid[p];
      deltas[trial * points + p] = (state_y->bits() - base_y) - (state_x->bits() - base_x);
    }
  });

  DeltaGrowthReport report;
  report.confidence = config.confidence;
  std::vector<double> xs(points), means(points), ses(points);
  for (std::size_t p = 0; p < points; ++p) {
    double mean = 0.0;
    for (std::size_t t = 0; t < config.trials; ++t) mean += deltas[t * points + p];
    mean /= static_cast<double>(config.trials);
    double var = 0.0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      const double diff = deltas[t * points + p] - mean;
      var += diff * diff;
    }
    var /= static_cast<double>(config.trials - 1);
    const double se = std::sqrt(var / static_cast<double>(config.trials));
    report.points.push_back(DeltaGrowthPoint{grid[p], mean, se});
    xs[p] = static_cast<double>(grid[p]);
    means[p] = mean;
    ses[p] = se;
  }
  const auto fit = stats::ols_fit(xs, means, ses);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.slope_se = fit.slope_se;
  const double half = stats::z_for_confidence(config.confidence) * fit.slope_se;
  report.slope_ci = Interval{fit.slope - half, fit.slope + half};
  return report;
}

ErrorRateReport homogeneity_error_experiment(const HomogeneityErrorConfig& config) {
  check_model_pair(config.model_x, config.model_y);
  check_confidence(config.confidence);
  if (config.trials < 1) throw Error(errc::domain_error, "trials must be >= 1");
  if (config.sequences_per_group < 2) {
    throw Error(errc::domain_error, "each group needs at least 2 sequences");
  }
  if (config.sequence_length < 1) {
    throw Error(errc::domain_error, "sequence length must be >= 1");
  }
  if (!(config.alpha > 0.0) || !(config.alpha < 1.0)) {
    throw Error(errc::domain_error, "alpha must lie in (0, 1)");
  }

  const std::size_t n = config.sequences_per_group;
  std::vector<std::uint8_t> rejected(config.trials, 0);
  std::vector<std::uint64_t> seeds(config.trials, 0);
  detail::parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);
    seeds[trial] = trial_seed;
    SampleGroup x{"x", {}}, y{"y", {}};
    x.sequences.reserve(n);
    y.sequences.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      x.sequences.push_back(
          generate(config.model_x, config.sequence_length, derive_seed(trial_seed, i)));
      y.sequences.push_back(
          generate(config.model_y, config.sequence_length, derive_seed(trial_seed, n + i)));
    }
    HomogeneityOptions options;
    options.alpha = config.alpha;
    options.split = SplitPlan{config.split_policy, derive_seed(trial_seed, 2 * n)};
    const auto test = homogeneity_test(x, y, config.codec, options);
    rejected[trial] = test.decision == Decision::reject_h0 ? 1 : 0;
  });

  std::size_t rejections = 0;
  for (std::uint8_t r : rejected) rejections += r;

  ErrorRateReport report;
  report.trials = config.trials;
  report.confidence = config.confidence;
  report.trial_seeds = std::move(seeds);
  if (same_model(config.model_x, config.model_y)) {
    report.events = rejections;
    report.rate = static_cast<double>(rejections) / static_cast<double>(config.trials);
    report.type_i_rate = report.rate;
  } else {
    report.events = config.trials - rejections;
    report.rate = static_cast<double>(report.events) / static_cast<double>(config.trials);
    report.type_ii_rate = report.rate;
  }
  report.ci_half_width = binomial_half_width(report.events, report.trials, config.confidence);
  return report;
}

ErrorRateReport classification_experiment(const ClassificationExperimentConfig& config) {
  check_confidence(config.confidence);
  if (config.sources.empty()) {
    throw Error(errc::domain_error, "classification experiment needs at least one source");
  }
  for (const auto& source : config.sources) {
    validate(source.model);
    if (!same_alphabet(source.model.alphabet, config.sources.front().model.alphabet)) {
      throw Error(errc::domain_error, "sources use different alphabets");
    }
  }
  if (config.trials < 1) throw Error(errc::domain_error, "trials must be >= 1");
  if (config.reference_length < 1 || config.target_length < 1) {
    throw Error(errc::domain_error, "reference and target lengths must be >= 1");
  }

  const std::size_t k = config.sources.size();
  std::vector<std::uint8_t> correct(config.trials, 0);
  std::vector<std::uint64_t> seeds(config.trials, 0);
  detail::parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);
    seeds[trial] = trial_seed;
    const std::size_t true_class = trial % k;
    TrainingBank bank;
    bank.spec = config.codec;
    bank.classes.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      bank.classes.push_back(TrainingBank::Entry{
          config.sources[i].label,
          generate(config.sources[i].model, config.reference_length, derive_seed(trial_seed, i))});
    }
    const Sequence target = generate(config.sources[true_class].model, config.target_length,
                                     derive_seed(trial_seed, k));
    const auto result = classify(target, bank);
    correct[trial] = result.winner_index == true_class ? 1 : 0;
  });

  std::size_t hits = 0;
  for (std::uint8_t c : correct) hits += c;

  ErrorRateReport report;
  report.trials = config.trials;
  report.events = hits;
  report.rate = static_cast<double>(hits) / static_cast<double>(config.trials);
  report.accuracy = report.rate;
  report.confidence = config.confidence;
  report.ci_half_width = binomial_half_width(hits, config.trials, config.confidence);
  report.trial_seeds = std::move(seeds);
  return report;
}

}  // namespace compstat
