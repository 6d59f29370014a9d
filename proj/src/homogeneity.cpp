#include "compstat/homogeneity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "compstat/rng.hpp"
#include "compstat/stats.hpp"

namespace compstat {

namespace {

void check_group(const SampleGroup& group) {
  if (group.sequences.size() < 2) {
    throw Error(errc::domain_error,
                "group \"" + group.label + "\" needs at least 2 sequences to split");
  }
  for (const auto& s : group.sequences) {
    if (s.empty()) {
      throw Error(errc::domain_error, "group \"" + group.label + "\" contains an empty sequence");
    }
    if (!same_alphabet(s.alphabet(), group.sequences.front().alphabet())) {
      throw Error(errc::domain_error, "group \"" + group.label + "\" mixes alphabets");
    }
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(errc::domain_error, "alpha must lie in (0, 1)");
  }
}

void check_2x2(const ContingencyTable& t) {
  if (t.rows != 2 || t.cols != 2) {
    throw Error(errc::domain_error, "expected a 2x2 contingency table");
  }
}

// Conditional lengths of each target against a reference, sharing one primed
// state: the reference is fed once, each target scored on a clone.
std::vector<double> conditional_lengths(std::span<const Sequence> targets,
                                        const Sequence& reference, const Codec& codec) {
  auto primed = codec.start();
  primed->feed(reference);
  const double base = primed->bits();
  std::vector<double> out;
  out.reserve(targets.size());
  for (const auto& t : targets) {
    auto state = primed->clone();
    state->feed(t);
    out.push_back(state->bits() - base);
  }
  return out;
}

std::vector<double> score_pair(std::span<const Sequence> heldout, const Sequence& own_ref,
                               const Sequence& other_ref, const CompressorSpec& spec,
                               const char* what) {
  if (heldout.empty()) {
    throw Error(errc::domain_error, std::string(what) + ": held-out list must be nonempty");
  }
  if (own_ref.empty() || other_ref.empty()) {
    throw Error(errc::domain_error, std::string(what) + ": references must be nonempty");
  }
  for (const auto& s : heldout) {
    if (s.empty()) throw Error(errc::domain_error, std::string(what) + ": empty held-out sequence");
    if (!same_alphabet(s.alphabet(), own_ref.alphabet()) ||
        !same_alphabet(s.alphabet(), other_ref.alphabet())) {
      throw Error(errc::domain_error, std::string(what) + ": alphabet mismatch");
    }
  }
  const auto codec = make_codec(spec, own_ref.alphabet());
  const auto own = conditional_lengths(heldout, own_ref, *codec);
  const auto other = conditional_lengths(heldout, other_ref, *codec);
  std::vector<double> scores(heldout.size());
  for (std::size_t i = 0; i < heldout.size(); ++i) scores[i] = other[i] - own[i];
  return scores;
}

}  // namespace

SplitResult split(const SampleGroup& group, const SplitPlan& plan) {
  check_group(group);
  const std::size_t k = group.sequences.size();
  const std::size_t half = k / 2;
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  if (plan.policy == SplitPolicy::seeded_random) {
    std::mt19937_64 rng(plan.seed);
    for (std::size_t i = k - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }
  }
  std::vector<std::size_t> reference_indices(order.begin(), order.begin() + half);
  std::vector<std::size_t> heldout_indices(order.begin() + half, order.end());
  std::sort(reference_indices.begin(), reference_indices.end());
  std::sort(heldout_indices.begin(), heldout_indices.end());
  std::vector<Sequence> ref_parts;
  ref_parts.reserve(half);
  for (std::size_t i : reference_indices) ref_parts.push_back(group.sequences[i]);
  std::vector<Sequence> heldout;
  heldout.reserve(k - half);
  for (std::size_t i : heldout_indices) heldout.push_back(group.sequences[i]);
  return SplitResult{concat(ref_parts), std::move(heldout), std::move(reference_indices),
                     std::move(heldout_indices)};
}

std::vector<double> gamma_scores(std::span<const Sequence> heldout_x, const Sequence& x_star,
                                 const Sequence& y_star, const CompressorSpec& spec) {
  return score_pair(heldout_x, x_star, y_star, spec, "gamma_scores");
}

std::vector<double> delta_scores(std::span<const Sequence> heldout_y, const Sequence& x_star,
                                 const Sequence& y_star, const CompressorSpec& spec) {
  return score_pair(heldout_y, y_star, x_star, spec, "delta_scores");
}

ContingencyTable ContingencyTable::make_2x2(std::uint64_t n11, std::uint64_t n12,
                                            std::uint64_t n21, std::uint64_t n22) {
  ContingencyTable t;
  t.rows = t.cols = 2;
  t.counts = {n11, n12, n21, n22};
  t.row_labels = {"row1", "row2"};
  t.col_labels = {"col1", "col2"};
  return t;
}

std::uint64_t ContingencyTable::row_total(std::size_t r) const {
  std::uint64_t sum = 0;
  for (std::size_t c = 0; c < cols; ++c) sum += at(r, c);
  return sum;
}

std::uint64_t ContingencyTable::col_total(std::size_t c) const {
  std::uint64_t sum = 0;
  for (std::size_t r = 0; r < rows; ++r) sum += at(r, c);
  return sum;
}

std::uint64_t ContingencyTable::grand_total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t;
  t.rows = cols;
  t.cols = rows;
  t.counts.resize(counts.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t.counts[c * rows + r] = at(r, c);
  }
  t.row_labels = col_labels;
  t.col_labels = row_labels;
  return t;
}

ContingencyTable build_2x2(std::span<const double> gammas, std::span<const double> deltas) {
  if (gammas.empty() || deltas.empty()) {
    throw Error(errc::domain_error, "build_2x2 needs nonempty score lists");
  }
  std::uint64_t n11 = 0, n12 = 0, n21 = 0, n22 = 0;
  for (double g : gammas) (g >= 0.0 ? n11 : n12) += 1;
  for (double d : deltas) (d >= 0.0 ? n22 : n21) += 1;
  return ContingencyTable::make_2x2(n11, n12, n21, n22);
}

std::vector<std::string> check_requirements(const ContingencyTable& table) {
  std::vector<std::string> warnings;
  const double n = static_cast<double>(table.grand_total());
  if (n == 0.0) {
    warnings.push_back("table is empty");
    return warnings;
  }
  for (std::size_t r = 0; r < table.rows; ++r) {
    if (table.row_total(r) == 0) {
      warnings.push_back("row " + std::to_string(r + 1) + " margin is zero");
    }
  }
  for (std::size_t c = 0; c < table.cols; ++c) {
    if (table.col_total(c) == 0) {
      warnings.push_back("column " + std::to_string(c + 1) + " margin is zero");
    }
  }
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (std::size_t c = 0; c < table.cols; ++c) {
      const double expected =
          static_cast<double>(table.row_total(r)) * static_cast<double>(table.col_total(c)) / n;
      if (expected < 5.0) {
        warnings.push_back("expected count below 5 in cell (" + std::to_string(r + 1) + "," +
                           std::to_string(c + 1) + ")");
      }
    }
  }
  return warnings;
}

const char* decision_name(Decision d) {
  return d == Decision::reject_h0 ? "REJECT_H0" : "RETAIN_H0";
}

const char* method_name(TestMethod m) {
  switch (m) {
    case TestMethod::chi_square_yates: return "CHI_SQUARE_YATES";
    case TestMethod::chi_square: return "CHI_SQUARE";
    case TestMethod::fisher_exact: return "FISHER_EXACT";
    case TestMethod::chi_square_sxs: return "CHI_SQUARE_SXS";
  }
  return "UNKNOWN";
}

TestReport chi_square_2x2(const ContingencyTable& table, double alpha, bool yates) {
  check_2x2(table);
  check_alpha(alpha);
  if (table.grand_total() == 0) {
    throw Error(errc::domain_error, "chi_square_2x2 requires a positive grand total");
  }
  TestReport report;
  report.table = table;
  report.alpha = alpha;
  report.method = yates ? TestMethod::chi_square_yates : TestMethod::chi_square;
  report.df = 1;

  const double a = static_cast<double>(table.at(0, 0)), b = static_cast<double>(table.at(0, 1));
  const double c = static_cast<double>(table.at(1, 0)), d = static_cast<double>(table.at(1, 1));
  const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d, n = r1 + r2;
  if (r1 == 0.0 || r2 == 0.0 || c1 == 0.0 || c2 == 0.0) {
    report.warnings.push_back("degenerate table: a zero margin leaves the statistic undefined");
    report.statistic.reset();
    report.p_value = 1.0;
    report.decision = Decision::retain_h0;
    return report;
  }
  double dev = std::fabs(a * d - b * c);
  if (yates) dev = std::max(0.0, dev - n / 2.0);
  const double statistic = n * dev * dev / (r1 * r2 * c1 * c2);
  report.statistic = statistic;
  report.p_value = stats::chi_square_sf(statistic, 1.0);
  report.decision = report.p_value < alpha ? Decision::reject_h0 : Decision::retain_h0;
  return report;
}

double fisher_exact_2x2(const ContingencyTable& table) {
  check_2x2(table);
  const std::uint64_t a = table.at(0, 0), b = table.at(0, 1);
  const std::uint64_t c = table.at(1, 0), d = table.at(1, 1);
  const double r1 = static_cast<double>(a + b), r2 = static_cast<double>(c + d);
  const double c1 = static_cast<double>(a + c);
  const double n = r1 + r2;
  if (n == 0.0) return 1.0;

  // P(A = x | margins) is hypergeometric; sum every table whose probability
  // does not exceed the observed one (small relative slack absorbs rounding
  // among exactly-tied tables).
  const double log_denominator = stats::log_choose(n, c1);
  auto log_prob = [&](double x) {
    return stats::log_choose(r1, x) + stats::log_choose(r2, c1 - x) - log_denominator;
  };
  const double lo = std::max(0.0, c1 - r2);
  const double hi = std::min(r1, c1);
  const double observed = log_prob(static_cast<double>(a));
  double p = 0.0;
  for (double x = lo; x <= hi; x += 1.0) {
    const double lp = log_prob(x);
    if (lp <= observed + 1e-7) p += std::exp(lp);
  }
  return std::min(p, 1.0);
}

TestReport homogeneity_test(const SampleGroup& x, const SampleGroup& y,
                            const CompressorSpec& spec, const HomogeneityOptions& options) {
  check_alpha(options.alpha);
  check_group(x);
  check_group(y);
  if (!same_alphabet(x.sequences.front().alphabet(), y.sequences.front().alphabet())) {
    throw Error(errc::domain_error, "groups use different alphabets");
  }
  SplitPlan plan_x = options.split, plan_y = options.split;
  if (options.split.policy == SplitPolicy::seeded_random) {
    plan_x.seed = derive_seed(options.split.seed, 0);
    plan_y.seed = derive_seed(options.split.seed, 1);
  }
  const SplitResult sx = split(x, plan_x);
  const SplitResult sy = split(y, plan_y);
  const auto gammas = gamma_scores(sx.heldout, sx.reference, sy.reference, spec);
  const auto deltas = delta_scores(sy.heldout, sx.reference, sy.reference, spec);

  ContingencyTable table = build_2x2(gammas, deltas);
  const std::string lx = x.label.empty() ? "x" : x.label;
  const std::string ly = y.label.empty() ? "y" : y.label;
  table.row_labels = {lx + " held-out", ly + " held-out"};
  table.col_labels = {"closer to " + lx, "closer to " + ly};

  const auto requirement_warnings = check_requirements(table);
  TestReport report;
  if (requirement_warnings.empty()) {
    report = chi_square_2x2(table, options.alpha, options.yates);
  } else {
    report.table = table;
    report.alpha = options.alpha;
    report.method = TestMethod::fisher_exact;
    report.df = 0;
    report.p_value = fisher_exact_2x2(table);
    report.decision = report.p_value < options.alpha ? Decision::reject_h0 : Decision::retain_h0;
    report.warnings = requirement_warnings;
    report.warnings.push_back("chi-square requirements not met; used Fisher's exact test");
  }
  report.gammas = gammas;
  report.deltas = deltas;
  return report;
}

ContingencyTable build_sxs(std::span<const SampleGroup> groups, const CompressorSpec& spec,
                           const SplitPlan& plan) {
  if (groups.size() < 2) {
    throw Error(errc::domain_error, "build_sxs needs at least 2 groups");
  }
  for (const auto& g : groups) {
    check_group(g);
    if (!same_alphabet(g.sequences.front().alphabet(),
                       groups.front().sequences.front().alphabet())) {
      throw Error(errc::domain_error, "groups use different alphabets");
    }
  }
  const std::size_t s = groups.size();
  std::vector<SplitResult> splits;
  splits.reserve(s);
  for (std::size_t i = 0; i < s; ++i) {
    SplitPlan p = plan;
    if (plan.policy == SplitPolicy::seeded_random) p.seed = derive_seed(plan.seed, i);
    splits.push_back(split(groups[i], p));
  }

  const auto codec = make_codec(spec, groups.front().sequences.front().alphabet());
  ContingencyTable table;
  table.rows = table.cols = s;
  table.counts.assign(s * s, 0);
  for (std::size_t i = 0; i < s; ++i) {
    const std::string label = groups[i].label.empty() ? "group" + std::to_string(i + 1)
                                                      : groups[i].label;
    table.row_labels.push_back(label + " held-out");
    table.col_labels.push_back(label + " reference");
  }

  // score[j][t] = conditional length of group i's held-out t against reference j
  for (std::size_t i = 0; i < s; ++i) {
    std::vector<std::vector<double>> scores;
    scores.reserve(s);
    for (std::size_t j = 0; j < s; ++j) {
      scores.push_back(conditional_lengths(splits[i].heldout, splits[j].reference, *codec));
    }
    for (std::size_t t = 0; t < splits[i].heldout.size(); ++t) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < s; ++j) {
        if (scores[j][t] < scores[best][t]) best = j;
      }
      ++table.at(i, best);
    }
  }
  return table;
}

TestReport chi_square_sxs(const ContingencyTable& table, double alpha) {
  check_alpha(alpha);
  if (table.rows < 2 || table.cols < 2) {
    throw Error(errc::domain_error, "chi_square_sxs needs at least a 2x2 table");
  }
  TestReport report;
  report.table = table;
  report.alpha = alpha;
  report.method = TestMethod::chi_square_sxs;
  report.df = static_cast<unsigned>((table.rows - 1) * (table.cols - 1));

  const double n = static_cast<double>(table.grand_total());
  bool degenerate = n == 0.0;
  for (std::size_t r = 0; r < table.rows && !degenerate; ++r) degenerate = table.row_total(r) == 0;
  for (std::size_t c = 0; c < table.cols && !degenerate; ++c) degenerate = table.col_total(c) == 0;
  if (degenerate) {
    report.warnings.push_back("degenerate table: a zero margin leaves the statistic undefined");
    report.p_value = 1.0;
    report.decision = Decision::retain_h0;
    return report;
  }
  double statistic = 0.0;
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (std::size_t c = 0; c < table.cols; ++c) {
      const double expected =
          static_cast<double>(table.row_total(r)) * static_cast<double>(table.col_total(c)) / n;
      const double diff = static_cast<double>(table.at(r, c)) - expected;
      statistic += diff * diff / expected;
    }
  }
  report.statistic = statistic;
  report.p_value = stats::chi_square_sf(statistic, static_cast<double>(report.df));
  report.decision = report.p_value < alpha ? Decision::reject_h0 : Decision::retain_h0;
  return report;
}

}  // namespace compstat
