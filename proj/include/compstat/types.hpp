#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace compstat {

enum class errc {
  domain_error,      // precondition violated by caller input
  backend_error,     // external compressor failed
  resource_error,    // enumeration / size guard exceeded
  undefined_result,  // statistic undefined on this input
  io_error,          // file system problem
  parse_error,       // malformed model/config file
  usage_error,       // bad CLI flags
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// Symbol = index into an Alphabet.
using Symbol = std::uint32_t;

/// Ordered set of distinct tokens. Sequences refer to symbols by index.
class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> tokens);

  static Alphabet binary();                 // tokens "0", "1"
  static Alphabet bytes();                  // all 256 single-byte tokens

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(Symbol i) const { return tokens_.at(i); }
  std::optional<Symbol> find(std::string_view token) const;

  bool operator==(const Alphabet& other) const noexcept {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Symbol> index_;
};

using AlphabetRef = std::shared_ptr<const Alphabet>;

inline bool same_alphabet(const AlphabetRef& a, const AlphabetRef& b) {
  return a == b || (a && b && *a == *b);
}

/// Immutable symbol string over a shared alphabet.
class Sequence {
 public:
  Sequence(AlphabetRef alphabet, std::vector<Symbol> data);

  const AlphabetRef& alphabet() const noexcept { return alphabet_; }
  std::span<const Symbol> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  Symbol operator[](std::size_t i) const { return data_[i]; }

  /// Renders the sequence as the concatenation of its tokens.
  std::string to_text() const;

 private:
  AlphabetRef alphabet_;
  std::vector<Symbol> data_;
};

/// Concatenation in argument order, no separator.
Sequence concat(std::span<const Sequence> parts);
Sequence concat(const Sequence& a, const Sequence& b);

/// Code length in bits. Ideal (arithmetic-coding) lengths are fractional;
/// integer-bit backends produce integers. Carried as a real so that
/// |phi(uv)| - |phi(u)| is exact.
struct CodeLength {
  double bits = 0.0;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

}  // namespace compstat
