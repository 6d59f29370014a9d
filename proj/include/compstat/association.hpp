#pragma once

#include <optional>
#include <string>
#include <vector>

#include "compstat/homogeneity.hpp"
#include "compstat/types.hpp"

namespace compstat {

/// Yule's Q = (n11·n22 − n12·n21)/(n11·n22 + n12·n21).
/// Throws undefined_result when both cross products vanish (equivalently,
/// when some margin is zero).
double yule_q(const ContingencyTable& table);

/// V = (n11·n22 − n12·n21)/sqrt(r1·r2·c1·c2) over the four margins (the
/// phi coefficient). Throws undefined_result on a zero margin.
double coefficient_v(const ContingencyTable& table);

struct StandardErrors {
  std::optional<double> se_q;  // absent when any cell is zero (needs reciprocals)
  double se_v = 0.0;
  std::optional<Interval> ci_q;
  Interval ci_v{};
  std::vector<std::string> warnings;
};

/// Large-sample standard errors and clamped confidence intervals:
/// se_q = ((1−Q²)/2)·sqrt(Σ 1/n_ij), se_v = sqrt((1−V²)/N),
/// CI = estimate ± z·SE intersected with [−1, 1].
StandardErrors standard_errors(const ContingencyTable& table, double confidence = 0.95);

struct AssociationReport {
  ContingencyTable table;
  double q = 0.0;
  double v = 0.0;
  std::optional<double> se_q;
  double se_v = 0.0;
  std::optional<Interval> ci_q;
  Interval ci_v{};
  double confidence = 0.95;
  std::vector<std::string> warnings;
};

/// Both coefficients plus their errors in one report. Degenerate tables
/// (zero margin) propagate the undefined-result error.
AssociationReport associate(const ContingencyTable& table, double confidence = 0.95);

}  // namespace compstat
