#pragma once

#include <bit>
#include <cstdint>
#include <memory>

#include "compstat/codec.hpp"

namespace compstat::detail {

/// Bits needed to address `options` distinct choices.
inline std::uint64_t ceil_log2(std::uint64_t options) {
  return options <= 1 ? 0 : std::bit_width(options - 1);
}

std::unique_ptr<Codec> make_lz78(AlphabetRef alphabet);
std::unique_ptr<Codec> make_ppm(const PpmSpec& spec, AlphabetRef alphabet);
std::unique_ptr<Codec> make_bwt(const BwtSpec& spec, AlphabetRef alphabet);
std::unique_ptr<Codec> make_external(const ExternalSpec& spec, AlphabetRef alphabet);

}  // namespace compstat::detail
