#include "compstat/codec.hpp"

#include <cmath>
#include <vector>

#include "codec_backends.hpp"

namespace compstat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_nonempty(const Sequence& s, const char* what) {
  if (s.empty()) throw Error(errc::domain_error, std::string(what) + " must be nonempty");
}

void require_same_alphabet(const Sequence& a, const Sequence& b, const char* what) {
  if (!same_alphabet(a.alphabet(), b.alphabet())) {
    throw Error(errc::domain_error, std::string("alphabet mismatch between ") + what);
  }
}

}  // namespace

std::string describe(const CompressorSpec& spec) {
  return std::visit(
      overloaded{
          [](const Lz78Spec&) { return std::string("lz78"); },
          [](const PpmSpec& p) { return "ppm(order=" + std::to_string(p.order) + ")"; },
          [](const BwtSpec& b) {
            return b.block_size ? "bwt(block=" + std::to_string(*b.block_size) + ")"
                                : std::string("bwt");
          },
          [](const ExternalSpec& e) { return "external(" + e.command + ")"; },
      },
      spec);
}

std::unique_ptr<Codec> make_codec(const CompressorSpec& spec, AlphabetRef alphabet) {
  if (!alphabet) throw Error(errc::domain_error, "codec requires an alphabet");
  return std::visit(
      overloaded{
          [&](const Lz78Spec&) { return detail::make_lz78(std::move(alphabet)); },
          [&](const PpmSpec& p) { return detail::make_ppm(p, std::move(alphabet)); },
          [&](const BwtSpec& b) { return detail::make_bwt(b, std::move(alphabet)); },
          [&](const ExternalSpec& e) { return detail::make_external(e, std::move(alphabet)); },
      },
      spec);
}

CodeLength compress_length(const CompressorSpec& spec, const Sequence& s) {
  require_nonempty(s, "sequence");
  auto state = make_codec(spec, s.alphabet())->start();
  state->feed(s);
  return {state->bits()};
}

CodeLength conditional_length(const CompressorSpec& spec, const Sequence& target,
                              const Sequence& context) {
  require_nonempty(target, "target");
  require_same_alphabet(target, context, "target and context");
  auto state = make_codec(spec, target.alphabet())->start();
  state->feed(context);
  const double context_bits = state->bits();
  state->feed(target);
  return {state->bits() - context_bits};
}

double induced_probability(const CompressorSpec& spec, const Sequence& s) {
  return std::exp2(-compress_length(spec, s).bits);
}

double kraft_sum(const CompressorSpec& spec, std::size_t n, const AlphabetRef& alphabet) {
  if (!alphabet) throw Error(errc::domain_error, "kraft_sum requires an alphabet");
  if (n == 0) throw Error(errc::domain_error, "kraft_sum word length must be >= 1");
  constexpr std::uint64_t guard = std::uint64_t{1} << 20;
  const std::uint64_t a = alphabet->size();
  std::uint64_t words = 1;
  for (std::size_t i = 0; i < n; ++i) {
    words *= a;
    if (words > guard) {
      throw Error(errc::resource_error, "kraft_sum enumeration exceeds 2^20 words");
    }
  }
  const auto codec = make_codec(spec, alphabet);
  std::vector<Symbol> word(n, 0);
  double sum = 0.0;
  while (true) {
    auto state = codec->start();
    state->feed(std::span<const Symbol>(word));
    sum += std::exp2(-state->bits());
    std::size_t i = n;
    while (i > 0) {
      if (++word[i - 1] < a) break;
      word[i - 1] = 0;
      --i;
    }
    if (i == 0) break;
  }
  return sum;
}

double delta_statistic(const CompressorSpec& spec, const Sequence& w,
                       const Sequence& x_ctx, const Sequence& y_ctx) {
  require_nonempty(w, "w");
  require_same_alphabet(w, x_ctx, "w and x context");
  require_same_alphabet(w, y_ctx, "w and y context");
  const auto codec = make_codec(spec, w.alphabet());
  auto against = [&](const Sequence& ctx) {
    auto state = codec->start();
    state->feed(ctx);
    const double base = state->bits();
    state->feed(w);
    return state->bits() - base;
  };
  return against(y_ctx) - against(x_ctx);
}

}  // namespace compstat
