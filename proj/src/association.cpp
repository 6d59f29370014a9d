#include "compstat/association.hpp"

#include <cmath>

#include "compstat/stats.hpp"

namespace compstat {

namespace {

void check_2x2(const ContingencyTable& t) {
  if (t.rows != 2 || t.cols != 2) {
    throw Error(errc::domain_error, "association coefficients need a 2x2 table");
  }
}

void check_confidence(double confidence) {
  if (!(confidence > 0.0) || !(confidence < 1.0)) {
    throw Error(errc::domain_error, "confidence level must lie in (0, 1)");
  }
}

Interval clamped(double center, double half_width) {
  return Interval{std::max(-1.0, center - half_width), std::min(1.0, center + half_width)};
}

}  // namespace

double yule_q(const ContingencyTable& table) {
  check_2x2(table);
  const double concordant = static_cast<double>(table.at(0, 0)) * static_cast<double>(table.at(1, 1));
  const double discordant = static_cast<double>(table.at(0, 1)) * static_cast<double>(table.at(1, 0));
  if (concordant + discordant == 0.0) {
    throw Error(errc::undefined_result, "both cross products are zero; Q is undefined");
  }
  return (concordant - discordant) / (concordant + discordant);
}

double coefficient_v(const ContingencyTable& table) {
  check_2x2(table);
  const double r1 = static_cast<double>(table.row_total(0));
  const double r2 = static_cast<double>(table.row_total(1));
  const double c1 = static_cast<double>(table.col_total(0));
  const double c2 = static_cast<double>(table.col_total(1));
  if (r1 == 0.0 || r2 == 0.0 || c1 == 0.0 || c2 == 0.0) {
    throw Error(errc::undefined_result, "a zero margin leaves V undefined");
  }
  const double concordant = static_cast<double>(table.at(0, 0)) * static_cast<double>(table.at(1, 1));
  const double discordant = static_cast<double>(table.at(0, 1)) * static_cast<double>(table.at(1, 0));
  return (concordant - discordant) / std::sqrt(r1 * r2 * c1 * c2);
}

StandardErrors standard_errors(const ContingencyTable& table, double confidence) {
  check_2x2(table);
  check_confidence(confidence);
  const double q = yule_q(table);
  const double v = coefficient_v(table);
  const double z = stats::z_for_confidence(confidence);

  StandardErrors se;
  se.se_v = std::sqrt((1.0 - v * v) / static_cast<double>(table.grand_total()));
  se.ci_v = clamped(v, z * se.se_v);

  bool zero_cell = false;
  double reciprocal_sum = 0.0;
  for (std::uint64_t cell : table.counts) {
    if (cell == 0) {
      zero_cell = true;
    } else {
      reciprocal_sum += 1.0 / static_cast<double>(cell);
    }
  }
  if (zero_cell) {
    se.warnings.push_back("zero cell: the Q standard error needs all four reciprocals");
  } else {
    se.se_q = ((1.0 - q * q) / 2.0) * std::sqrt(reciprocal_sum);
    se.ci_q = clamped(q, z * *se.se_q);
  }
  return se;
}

AssociationReport associate(const ContingencyTable& table, double confidence) {
  AssociationReport report;
  report.table = table;
  report.confidence = confidence;
  report.q = yule_q(table);
  report.v = coefficient_v(table);
  auto se = standard_errors(table, confidence);
  report.se_q = se.se_q;
  report.se_v = se.se_v;
  report.ci_q = se.ci_q;
  report.ci_v = se.ci_v;
  report.warnings = std::move(se.warnings);
  return report;
}

}  // namespace compstat
