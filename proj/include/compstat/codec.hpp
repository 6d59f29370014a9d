#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "compstat/types.hpp"

namespace compstat {

// ---- Backend parameter blocks --------------------------------------------

struct Lz78Spec {
  bool operator==(const Lz78Spec&) const = default;
};

enum class PpmEscape { method_c };

struct PpmSpec {
  int order = 3;
  PpmEscape escape = PpmEscape::method_c;
  bool operator==(const PpmSpec&) const = default;
};

struct BwtSpec {
  // Unset = transform the whole message as one block.
  std::optional<std::size_t> block_size{};
  bool operator==(const BwtSpec&) const = default;
};

struct ExternalSpec {
  // Shell command template. "{in}"/"{out}" are replaced by temp-file paths;
  // without "{in}" the input arrives on stdin, without "{out}" stdout is
  // captured. The command must produce deterministic output length.
  std::string command;
  bool operator==(const ExternalSpec&) const = default;
};

using CompressorSpec = std::variant<Lz78Spec, PpmSpec, BwtSpec, ExternalSpec>;

/// Short human-readable form, e.g. "ppm(order=3)".
std::string describe(const CompressorSpec& spec);

// ---- Streaming interface ---------------------------------------------------

/// Incremental compressor state. bits() after feeding u then v equals the
/// total code length of u‖v, so conditional lengths are literal differences
/// of two bits() readings and additivity holds exactly.
class CodecState {
 public:
  virtual ~CodecState() = default;
  virtual void feed(std::span<const Symbol> symbols) = 0;
  virtual double bits() = 0;
  virtual std::unique_ptr<CodecState> clone() const = 0;

  void feed(const Sequence& s) { feed(s.data()); }
};

class Codec {
 public:
  virtual ~Codec() = default;
  virtual const AlphabetRef& alphabet() const = 0;
  virtual std::unique_ptr<CodecState> start() const = 0;
};

/// Build a backend for one alphabet. Validates spec parameters.
std::unique_ptr<Codec> make_codec(const CompressorSpec& spec, AlphabetRef alphabet);

// ---- Length operations -----------------------------------------------------

/// Total code length of s in bits. Deterministic in (spec, s).
CodeLength compress_length(const CompressorSpec& spec, const Sequence& s);

/// Code length of target given that context was already encoded:
/// compress_length(context‖target) − compress_length(context).
CodeLength conditional_length(const CompressorSpec& spec, const Sequence& target,
                              const Sequence& context);

/// 2^(−compress_length(s)); the probability the code assigns to s.
double induced_probability(const CompressorSpec& spec, const Sequence& s);

/// Sum of induced probabilities over every word of the given length.
/// Enumeration is guarded at 2^20 words.
double kraft_sum(const CompressorSpec& spec, std::size_t n, const AlphabetRef& alphabet);

/// conditional_length(w, y_ctx) − conditional_length(w, x_ctx); positive when
/// w compresses better against x_ctx than against y_ctx.
double delta_statistic(const CompressorSpec& spec, const Sequence& w,
                       const Sequence& x_ctx, const Sequence& y_ctx);

}  // namespace compstat
