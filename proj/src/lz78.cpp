// LZ78 incremental parsing with explicit bit accounting: the t-th completed
// phrase costs ceil(log2 t) pointer bits (a reference to one of the t-1
// earlier phrases or the empty phrase) plus ceil(log2 |A|) bits for its new
// symbol. A trailing incomplete phrase is charged pointer bits only.

#include <unordered_map>
#include <vector>

#include "codec_backends.hpp"

namespace compstat::detail {
namespace {

class Lz78State final : public CodecState {
 public:
  explicit Lz78State(AlphabetRef alphabet)
      : symbol_bits_(ceil_log2(alphabet->size())) {}

  void feed(std::span<const Symbol> symbols) override {
    for (Symbol s : symbols) {
      const std::uint64_t key = (static_cast<std::uint64_t>(node_) << 32) | s;
      auto it = children_.find(key);
      if (it != children_.end()) {
        node_ = it->second;
      } else {
        completed_bits_ += ceil_log2(next_phrase_) + symbol_bits_;
        children_.emplace(key, node_count_++);
        node_ = 0;
        ++next_phrase_;
      }
    }
  }

  double bits() override {
    double total = static_cast<double>(completed_bits_);
    if (node_ != 0) total += static_cast<double>(ceil_log2(next_phrase_));
    return total;
  }

  std::unique_ptr<CodecState> clone() const override {
    return std::make_unique<Lz78State>(*this);
  }

 private:
  // Phrase trie; node 0 is the root (empty phrase), edges keyed by
  // (parent node << 32 | symbol).
  std::unordered_map<std::uint64_t, std::uint32_t> children_;
  std::uint32_t node_count_ = 1;
  std::uint32_t node_ = 0;         // walk position inside the current phrase
  std::uint64_t next_phrase_ = 1;  // 1-indexed number of the phrase being built
  std::uint64_t completed_bits_ = 0;
  std::uint64_t symbol_bits_;
};

class Lz78Codec final : public Codec {
 public:
  explicit Lz78Codec(AlphabetRef alphabet) : alphabet_(std::move(alphabet)) {}
  const AlphabetRef& alphabet() const override { return alphabet_; }
  std::unique_ptr<CodecState> start() const override {
    return std::make_unique<Lz78State>(alphabet_);
  }

 private:
  AlphabetRef alphabet_;
};

}  // namespace

std::unique_ptr<Codec> make_lz78(AlphabetRef alphabet) {
  return std::make_unique<Lz78Codec>(std::move(alphabet));
}

}  // namespace compstat::detail
