// SPDX-License-Identifier: Apache-2.0

#ifndef ETP_INDEX_UTIL_HPP
#define ETP_INDEX_UTIL_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace etp::detail {

// Global index offsets contributed by every multi-index over `parties`
// (first listed party most significant). Offsets of disjoint party sets add.
inline std::vector<std::size_t> subset_offsets(std::span<const int> dims,
                                               std::span<const int> parties) {
  std::vector<std::size_t> stride(dims.size());
  std::size_t s = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    stride[k] = s;
    s *= static_cast<std::size_t>(dims[k]);
  }
  std::vector<std::size_t> out{0};
  for (int p : parties) {
    const auto d = static_cast<std::size_t>(dims[static_cast<std::size_t>(p)]);
    std::vector<std::size_t> next;
    next.reserve(out.size() * d);
    for (std::size_t base : out)
      for (std::size_t i = 0; i < d; ++i) next.push_back(base + i * stride[static_cast<std::size_t>(p)]);
    out = std::move(next);
  }
  return out;
}

}  // namespace etp::detail

#endif  // ETP_INDEX_UTIL_HPP
