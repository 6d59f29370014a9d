#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "compstat/types.hpp"

namespace compstat {

/// Finite-memory stationary source. Contexts are the last `order` symbols
/// packed base-|A| with the newest symbol in the lowest digit; `transition`
/// holds one next-symbol distribution per context, row-major.
struct MarkovModel {
  AlphabetRef alphabet;
  unsigned order = 0;              // memory M; 0 = i.i.d.
  std::vector<double> transition;  // [|A|^order][|A|]
  std::vector<double> initial;     // over contexts; empty = use stationary law

  std::size_t context_count() const;
};

bool same_model(const MarkovModel& a, const MarkovModel& b);

/// Throws domain_error unless rows are distributions (sum 1 ± 1e-12),
/// dimensions match, and the context space is enumerable (≤ 2^20).
void validate(const MarkovModel& model);

/// Unique stationary law over contexts. Throws when the chain has more than
/// one closed communicating class (law not unique) or none is reachable.
std::vector<double> stationary_distribution(const MarkovModel& model);

/// `length` symbols drawn from the transition kernel after an initial context
/// drawn from the model's initial (default: stationary) distribution.
/// Deterministic in (model, length, seed).
Sequence generate(const MarkovModel& model, std::size_t length, std::uint64_t seed);

/// Order-m conditional Shannon entropy h_m in bits per symbol, under the
/// stationary law. For m >= order this equals the limit entropy h_inf.
double entropy_m(const MarkovModel& model, unsigned m);

/// h_inf = entropy_m(model, model.order).
double limit_entropy(const MarkovModel& model);

/// Kullback-Leibler divergence sum p(b) log2(p(b)/q(b)) in bits. Returns
/// +infinity when q(b) = 0 < p(b); callers can test with std::isinf.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Builders for the two families every experiment uses.

/// i.i.d. binary source with P("1") = p1.
MarkovModel bernoulli_model(double p1);

/// Order-1 binary chain that repeats the previous symbol with probability
/// 1 - flip; stationary law is uniform, limit entropy h(flip).
MarkovModel binary_flip_model(double flip);

}  // namespace compstat
