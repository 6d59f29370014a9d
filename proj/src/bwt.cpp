// Burrows-Wheeler block transform over cyclic rotations, move-to-front, then
// an adaptive order-0 (Laplace) ideal-length coder over the MTF ranks, plus
// ceil(log2 L) bits to transmit the primary rotation index. Blocks are the
// whole message unless a block size was configured, so conditioning context
// carries across the full input. The transform is recomputed from the
// accumulated buffer whenever the length has changed since the last reading.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "codec_backends.hpp"

namespace compstat::detail {
namespace {

// Sort the cyclic rotations of `block` by content via rank doubling; ties
// between identical rotations (periodic blocks) break by start index so the
// result is deterministic.
std::vector<std::uint32_t> sorted_rotations(std::span<const Symbol> block) {
  const std::size_t n = block.size();
  std::vector<std::uint32_t> idx(n), rank(n), next(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < n; ++i) rank[i] = block[i];
  for (std::size_t h = 1;; h <<= 1) {
    auto cmp = [&](std::uint32_t x, std::uint32_t y) {
      if (rank[x] != rank[y]) return rank[x] < rank[y];
      return rank[(x + h) % n] < rank[(y + h) % n];
    };
    std::sort(idx.begin(), idx.end(), cmp);
    next[idx[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      next[idx[i]] = next[idx[i - 1]] + (cmp(idx[i - 1], idx[i]) ? 1 : 0);
    }
    rank.swap(next);
    if (rank[idx[n - 1]] == n - 1) break;  // all rotations distinct
    if (h >= n) break;                     // periodic block: ties are exact equals
  }
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (rank[x] != rank[y]) return rank[x] < rank[y];
    return x < y;
  });
  return idx;
}

double block_bits(std::span<const Symbol> block, std::uint32_t a) {
  const std::size_t n = block.size();
  if (n == 0) return 0.0;

  const auto order = sorted_rotations(block);
  std::vector<Symbol> bwt(n);
  for (std::size_t i = 0; i < n; ++i) {
    bwt[i] = block[(order[i] + n - 1) % n];
  }

  // Move-to-front over the alphabet, list initialized in symbol order.
  std::vector<Symbol> mtf(a);
  std::iota(mtf.begin(), mtf.end(), 0);
  std::vector<std::uint32_t> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Symbol c = bwt[i];
    std::uint32_t r = 0;
    while (mtf[r] != c) ++r;
    ranks[i] = r;
    for (; r > 0; --r) mtf[r] = mtf[r - 1];
    mtf[0] = c;
  }

  // Adaptive Laplace coder: P(rank) = (count + 1) / (seen + a).
  std::vector<std::uint32_t> count(a, 0);
  double bits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t r = ranks[i];
    bits -= std::log2(static_cast<double>(count[r] + 1) /
                      static_cast<double>(i + a));
    ++count[r];
  }
  return bits + static_cast<double>(ceil_log2(n));
}

class BwtState final : public CodecState {
 public:
  BwtState(AlphabetRef alphabet, std::optional<std::size_t> block_size)
      : alphabet_(std::move(alphabet)),
        a_(static_cast<std::uint32_t>(alphabet_->size())),
        block_size_(block_size) {}

  void feed(std::span<const Symbol> symbols) override {
    buf_.insert(buf_.end(), symbols.begin(), symbols.end());
  }

  double bits() override {
    if (cached_for_ != buf_.size()) {
      double total = 0.0;
      const std::size_t block = block_size_.value_or(buf_.size());
      for (std::size_t off = 0; off < buf_.size(); off += block) {
        const std::size_t len = std::min(block, buf_.size() - off);
        total += block_bits(std::span<const Symbol>(buf_).subspan(off, len), a_);
      }
      cached_bits_ = total;
      cached_for_ = buf_.size();
    }
    return cached_bits_;
  }

  std::unique_ptr<CodecState> clone() const override {
    return std::make_unique<BwtState>(*this);
  }

 private:
  AlphabetRef alphabet_;
  std::uint32_t a_;
  std::optional<std::size_t> block_size_;
  std::vector<Symbol> buf_;
  std::size_t cached_for_ = static_cast<std::size_t>(-1);
  double cached_bits_ = 0.0;
};

class BwtCodec final : public Codec {
 public:
  BwtCodec(AlphabetRef alphabet, std::optional<std::size_t> block_size)
      : alphabet_(std::move(alphabet)), block_size_(block_size) {}
  const AlphabetRef& alphabet() const override { return alphabet_; }
  std::unique_ptr<CodecState> start() const override {
    return std::make_unique<BwtState>(alphabet_, block_size_);
  }

 private:
  AlphabetRef alphabet_;
  std::optional<std::size_t> block_size_;
};

}  // namespace

std::unique_ptr<Codec> make_bwt(const BwtSpec& spec, AlphabetRef alphabet) {
  if (spec.block_size && *spec.block_size == 0) {
    throw Error(errc::domain_error, "bwt block size must be >= 1");
  }
  return std::make_unique<BwtCodec>(std::move(alphabet), spec.block_size);
}

}  // namespace compstat::detail
