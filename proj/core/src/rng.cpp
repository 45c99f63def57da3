#include "crowdcast/rng.hpp"

#include <cmath>

namespace crowdcast {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("alias table needs at least one weight");

  total_ = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("alias table weights must be finite and nonnegative");
    total_ += w;
  }
  if (!(total_ > 0.0))
    throw std::invalid_argument("alias table weights must not all be zero");

  accept_.assign(n, 1.0);
  alias_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) alias_[i] = std::uint32_t(i);

  // Vose's construction: scale to mean 1, then pair underfull and overfull bins.
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * double(n) / total_;
    (scaled[i] < 1.0 ? small : large).push_back(std::uint32_t(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    const std::uint32_t l = large.back();
    small.pop_back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are plain accepts; floating error only.
  for (std::uint32_t i : small) accept_[i] = 1.0;
  for (std::uint32_t i : large) accept_[i] = 1.0;
}

}  // namespace crowdcast
