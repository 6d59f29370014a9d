#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compstat/codec.hpp"
#include "compstat/types.hpp"

namespace compstat {

struct SampleGroup {
  std::string label;
  std::vector<Sequence> sequences;
};

enum class SplitPolicy { first_half, seeded_random };

struct SplitPlan {
  SplitPolicy policy = SplitPolicy::first_half;
  std::uint64_t seed = 0;  // consumed only by seeded_random
};

struct SplitResult {
  Sequence reference;  // the selected floor(k/2) sequences, concatenated in index order
  std::vector<Sequence> heldout;
  std::vector<std::size_t> reference_indices;
  std::vector<std::size_t> heldout_indices;
};

/// Partition a group into a concatenated reference half and held-out rest.
SplitResult split(const SampleGroup& group, const SplitPlan& plan);

/// gamma_i = len(x_i | y_reference) - len(x_i | x_reference): positive when
/// the held-out sequence compresses better against its own group's reference.
std::vector<double> gamma_scores(std::span<const Sequence> heldout_x, const Sequence& x_star,
                                 const Sequence& y_star, const CompressorSpec& spec);

/// delta_j = len(y_j | x_reference) - len(y_j | y_reference); the mirror of
/// gamma_scores with the group roles swapped.
std::vector<double> delta_scores(std::span<const Sequence> heldout_y, const Sequence& x_star,
                                 const Sequence& y_star, const CompressorSpec& spec);

struct ContingencyTable {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint64_t> counts;  // row-major
  std::vector<std::string> row_labels, col_labels;

  static ContingencyTable make_2x2(std::uint64_t n11, std::uint64_t n12, std::uint64_t n21,
                                   std::uint64_t n22);

  std::uint64_t at(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }
  std::uint64_t& at(std::size_t r, std::size_t c) { return counts[r * cols + c]; }
  std::uint64_t row_total(std::size_t r) const;
  std::uint64_t col_total(std::size_t c) const;
  std::uint64_t grand_total() const;
  ContingencyTable transposed() const;
};

/// Sign counts per the 2x2 layout: ties at zero fall to the diagonal.
ContingencyTable build_2x2(std::span<const double> gammas, std::span<const double> deltas);

/// Admissibility warnings for the chi-square approximation: empty means all
/// expected counts are >= 5 and no margin is zero.
std::vector<std::string> check_requirements(const ContingencyTable& table);

enum class Decision { retain_h0, reject_h0 };
enum class TestMethod { chi_square_yates, chi_square, fisher_exact, chi_square_sxs };

const char* decision_name(Decision d);
const char* method_name(TestMethod m);

struct TestReport {
  ContingencyTable table;
  std::optional<double> statistic;  // absent for exact/degenerate paths
  unsigned df = 0;
  double p_value = 1.0;
  double alpha = 0.05;
  Decision decision = Decision::retain_h0;
  TestMethod method = TestMethod::chi_square_yates;
  std::vector<std::string> warnings;
  std::vector<double> gammas, deltas;  // populated by homogeneity_test
};

/// Pearson chi-square on a 2x2 table, Yates continuity correction by default.
/// Zero-margin tables degrade to RETAIN_H0 with an explicit warning.
TestReport chi_square_2x2(const ContingencyTable& table, double alpha, bool yates = true);

/// Two-sided exact p-value: the total hypergeometric probability of all
/// tables with the observed margins whose probability does not exceed the
/// observed table's (within a small relative tolerance for ties).
double fisher_exact_2x2(const ContingencyTable& table);

struct HomogeneityOptions {
  double alpha = 0.05;
  SplitPlan split{};
  bool yates = true;
};

/// Full pipeline: split both groups, score held-out sequences against both
/// references, build the 2x2 table, then chi-square when admissible and
/// Fisher's exact test otherwise.
TestReport homogeneity_test(const SampleGroup& x, const SampleGroup& y,
                            const CompressorSpec& spec, const HomogeneityOptions& options = {});

/// s-group generalization: cell (i, j) counts held-out sequences of group i
/// whose conditional length against reference j is minimal (ties: lowest j).
ContingencyTable build_sxs(std::span<const SampleGroup> groups, const CompressorSpec& spec,
                           const SplitPlan& plan);

/// Pearson homogeneity chi-square with (rows-1)(cols-1) degrees of freedom.
TestReport chi_square_sxs(const ContingencyTable& table, double alpha);

}  // namespace compstat
