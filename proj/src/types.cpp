#include "compstat/types.hpp"

#include <algorithm>

namespace compstat {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::domain_error: return "domain_error";
    case errc::backend_error: return "backend_error";
    case errc::resource_error: return "resource_error";
    case errc::undefined_result: return "undefined_result";
    case errc::io_error: return "io_error";
    case errc::parse_error: return "parse_error";
    case errc::usage_error: return "usage_error";
  }
  return "unknown_error";
}

Alphabet::Alphabet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 2) {
    throw Error(errc::domain_error, "alphabet needs at least 2 symbols");
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<Symbol>(i));
    if (!inserted) {
      throw Error(errc::domain_error, "alphabet tokens must be distinct: duplicate \"" + tokens_[i] + "\"");
    }
  }
}

Alphabet Alphabet::binary() { return Alphabet({"0", "1"}); }

Alphabet Alphabet::bytes() {
  std::vector<std::string> tokens;
  tokens.reserve(256);
  for (int b = 0; b < 256; ++b) tokens.push_back(std::string(1, static_cast<char>(b)));
  return Alphabet(std::move(tokens));
}

std::optional<Symbol> Alphabet::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Sequence::Sequence(AlphabetRef alphabet, std::vector<Symbol> data)
    : alphabet_(std::move(alphabet)), data_(std::move(data)) {
  if (!alphabet_) throw Error(errc::domain_error, "sequence requires an alphabet");
  const auto n = alphabet_->size();
  for (Symbol s : data_) {
    if (s >= n) throw Error(errc::domain_error, "sequence symbol index out of alphabet range");
  }
}

std::string Sequence::to_text() const {
  std::string out;
  for (Symbol s : data_) out += alphabet_->token(s);
  return out;
}

Sequence concat(std::span<const Sequence> parts) {
  if (parts.empty()) throw Error(errc::domain_error, "concat of zero sequences");
  std::vector<Symbol> data;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (!same_alphabet(p.alphabet(), parts.front().alphabet())) {
      throw Error(errc::domain_error, "concat over mismatched alphabets");
    }
    total += p.size();
  }
  data.reserve(total);
  for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return Sequence(parts.front().alphabet(), std::move(data));
}

Sequence concat(const Sequence& a, const Sequence& b) {
  const Sequence parts[] = {a, b};
  return concat(std::span<const Sequence>(parts, 2));
}

}  // namespace compstat
