// Prediction by partial matching with escape method C and full exclusions.
// Each symbol is priced by cascading from the longest available context down
// to a uniform fallback over not-yet-excluded symbols. Escape probability at
// a level with q distinct seen symbols and n total count is q/(n+q); when the
// exclusions plus the seen set already cover the whole alphabet no novel
// symbol can follow, so the escape term is dropped and seen symbols are
// priced c/n. That keeps the conditional distribution summing to exactly 1,
// which is what makes the induced measure a probability measure (Kraft sum 1).
// Counts are updated at every order after each symbol; probabilities are
// ideal arithmetic-coding lengths, -log2(p), with no rounding.

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "codec_backends.hpp"

namespace compstat::detail {
namespace {

// Flat arrays indexed by packed context, one block per order.
class DenseTables {
 public:
  struct Handle {
    const std::uint32_t* counts;
    std::uint64_t total;
    std::uint32_t distinct;
    std::uint32_t a;
  };

  DenseTables(std::uint32_t a, int order) : a_(a) {
    std::uint64_t ctxs = 1, cells = 0, rows = 0;
    for (int o = 0; o <= order; ++o) {
      count_offset_.push_back(cells);
      row_offset_.push_back(rows);
      cells += ctxs * a;
      rows += ctxs;
      ctxs *= a;
    }
    counts_.assign(cells, 0);
    totals_.assign(rows, 0);
    distinct_.assign(rows, 0);
  }

  static std::uint64_t cell_count(std::uint64_t a, int order) {
    std::uint64_t ctxs = 1, cells = 0;
    for (int o = 0; o <= order; ++o) {
      cells += ctxs * a;
      ctxs *= a;
    }
    return cells;
  }

  Handle row(int o, std::uint64_t ctx) const {
    const std::size_t r = row_offset_[o] + ctx;
    return {counts_.data() + count_offset_[o] + ctx * a_, totals_[r], distinct_[r], a_};
  }
  static bool absent(const Handle& h) { return h.total == 0; }
  static std::uint32_t find(const Handle& h, Symbol s) { return h.counts[s]; }
  static std::uint64_t total(const Handle& h) { return h.total; }
  static std::uint32_t distinct(const Handle& h) { return h.distinct; }
  template <class F>
  static void for_each(const Handle& h, F&& f) {
    for (Symbol s = 0; s < h.a; ++s) {
      if (h.counts[s] != 0) f(s, h.counts[s]);
    }
  }
  void bump(int o, std::uint64_t ctx, Symbol s) {
    const std::size_t r = row_offset_[o] + ctx;
    std::uint32_t& c = counts_[count_offset_[o] + ctx * a_ + s];
    if (c == 0) ++distinct_[r];
    ++c;
    ++totals_[r];
  }

 private:
  std::uint32_t a_;
  std::vector<std::uint64_t> count_offset_;
  std::vector<std::uint64_t> row_offset_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint64_t> totals_;
  std::vector<std::uint32_t> distinct_;
};

// Hash maps keyed by packed context, one per order; rows store only the
// symbols actually seen.
class SparseTables {
 public:
  struct Row {
    std::vector<std::pair<Symbol, std::uint32_t>> cells;
    std::uint64_t total = 0;
  };
  struct Handle {
    const Row* row;
  };

  SparseTables(std::uint32_t a, int order) : maps_(order + 1) { (void)a; }

  Handle row(int o, std::uint64_t ctx) const {
    auto it = maps_[o].find(ctx);
    return {it == maps_[o].end() ? nullptr : &it->second};
  }
  static bool absent(const Handle& h) { return h.row == nullptr; }
  static std::uint32_t find(const Handle& h, Symbol s) {
    for (const auto& [sym, c] : h.row->cells) {
      if (sym == s) return c;
    }
    return 0;
  }
  static std::uint64_t total(const Handle& h) { return h.row->total; }
  static std::uint32_t distinct(const Handle& h) {
    return static_cast<std::uint32_t>(h.row->cells.size());
  }
  template <class F>
  static void for_each(const Handle& h, F&& f) {
    for (const auto& [sym, c] : h.row->cells) f(sym, c);
  }
  void bump(int o, std::uint64_t ctx, Symbol s) {
    Row& r = maps_[o][ctx];
    ++r.total;
    for (auto& [sym, c] : r.cells) {
      if (sym == s) {
        ++c;
        return;
      }
    }
    r.cells.emplace_back(s, 1);
  }

 private:
  std::vector<std::unordered_map<std::uint64_t, Row>> maps_;
};

template <class Tables>
class PpmState final : public CodecState {
 public:
  PpmState(AlphabetRef alphabet, int order)
      : alphabet_(std::move(alphabet)),
        a_(static_cast<std::uint32_t>(alphabet_->size())),
        order_(order),
        tables_(a_, order),
        excl_mark_(a_, 0) {
    ctx_.assign(order_ + 1, 0);
    pow_.assign(order_ + 1, 1);
    for (int o = 1; o <= order_; ++o) pow_[o] = pow_[o - 1] * a_;
    power_of_two_ = (a_ & (a_ - 1)) == 0;
    sym_shift_ = static_cast<unsigned>(ceil_log2(a_));
  }

  void feed(std::span<const Symbol> symbols) override {
    for (Symbol s : symbols) step(s);
  }

  double bits() override { return bits_; }

  std::unique_ptr<CodecState> clone() const override {
    return std::make_unique<PpmState>(*this);
  }

 private:
  void step(Symbol s) {
    const int top =
        fed_ < static_cast<std::uint64_t>(order_) ? static_cast<int>(fed_) : order_;
    double p = 1.0;
    const std::uint32_t gen = ++excl_gen_;
    std::uint32_t n_excluded = 0;
    bool coded = false;
    for (int o = top; o >= 0 && !coded; --o) {
      const auto row = tables_.row(o, ctx_[o]);
      if (Tables::absent(row)) continue;
      std::uint64_t n;
      std::uint32_t q;
      std::uint32_t cs;
      if (n_excluded == 0) {
        n = Tables::total(row);
        q = Tables::distinct(row);
        cs = Tables::find(row, s);
      } else {
        n = 0;
        q = 0;
        cs = 0;
        Tables::for_each(row, [&](Symbol sym, std::uint32_t c) {
          if (excl_mark_[sym] == gen) return;
          n += c;
          ++q;
          if (sym == s) cs = c;
        });
      }
      if (q == 0) continue;  // everything seen here is excluded: free skip
      const bool novel_possible = n_excluded + q < a_;
      if (cs != 0) {
        p *= static_cast<double>(cs) /
             static_cast<double>(novel_possible ? n + q : n);
        coded = true;
      } else {
        // novel_possible is necessarily true here: the target is never
        // excluded, so seen+excluded cannot cover the alphabet.
        p *= static_cast<double>(q) / static_cast<double>(n + q);
        Tables::for_each(row, [&](Symbol sym, std::uint32_t) {
          if (excl_mark_[sym] != gen) {
            excl_mark_[sym] = gen;
            ++n_excluded;
          }
        });
      }
    }
    if (!coded) p *= 1.0 / static_cast<double>(a_ - n_excluded);
    bits_ -= std::log2(p);

    for (int o = 0; o <= top; ++o) tables_.bump(o, ctx_[o], s);
    if (power_of_two_) {
      for (int o = 1; o <= order_; ++o) {
        ctx_[o] = ((ctx_[o] << sym_shift_) | s) & (pow_[o] - 1);
      }
    } else {
      for (int o = 1; o <= order_; ++o) {
        ctx_[o] = (ctx_[o] * a_ + s) % pow_[o];
      }
    }
    ++fed_;
  }

  AlphabetRef alphabet_;
  std::uint32_t a_;
  int order_;
  Tables tables_;
  std::vector<std::uint64_t> ctx_;   // packed last-o symbols per order
  std::vector<std::uint64_t> pow_;   // a^o
  std::vector<std::uint32_t> excl_mark_;
  std::uint32_t excl_gen_ = 0;
  std::uint64_t fed_ = 0;
  double bits_ = 0.0;
  bool power_of_two_;
  unsigned sym_shift_;
};

template <class Tables>
class PpmCodec final : public Codec {
 public:
  PpmCodec(AlphabetRef alphabet, int order)
      : alphabet_(std::move(alphabet)), order_(order) {}
  const AlphabetRef& alphabet() const override { return alphabet_; }
  std::unique_ptr<CodecState> start() const override {
    return std::make_unique<PpmState<Tables>>(alphabet_, order_);
  }

 private:
  AlphabetRef alphabet_;
  int order_;
};

}  // namespace

std::unique_ptr<Codec> make_ppm(const PpmSpec& spec, AlphabetRef alphabet) {
  if (spec.order < 0) throw Error(errc::domain_error, "ppm order must be >= 0");
  if (spec.escape != PpmEscape::method_c) {
    throw Error(errc::domain_error, "unsupported ppm escape method");
  }
  const std::uint64_t a = alphabet->size();
  std::uint64_t contexts = 1;
  for (int o = 0; o < spec.order; ++o) {
    if (contexts > (std::uint64_t{1} << 62) / a) {
      throw Error(errc::resource_error, "ppm context space too large for this alphabet/order");
    }
    contexts *= a;
  }
  constexpr std::uint64_t dense_cell_limit = std::uint64_t{1} << 22;
  // contexts*a did not overflow above, so cell_count stays in range.
  if (DenseTables::cell_count(a, spec.order) <= dense_cell_limit) {
    return std::make_unique<PpmCodec<DenseTables>>(std::move(alphabet), spec.order);
  }
  return std::make_unique<PpmCodec<SparseTables>>(std::move(alphabet), spec.order);
}

}  // namespace compstat::detail
