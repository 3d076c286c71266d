#include "multicoh/sample.hpp"

#include <bit>

#include "multicoh/errors.hpp"

namespace multicoh {

Adjacency::Adjacency(std::size_t n) : n_(n), bits_((pairs() + 63) / 64, 0) {}

void Adjacency::set(std::size_t i, std::size_t j, bool value) {
  if (i == j || i >= n_ || j >= n_) {
    throw ModelError("invalid node pair (" + std::to_string(i) + ", " +
                     std::to_string(j) + ") for n = " + std::to_string(n_));
  }
  const std::size_t k = index(i, j);
  const std::uint64_t mask = std::uint64_t{1} << (k & 63);
  if (value) {
    bits_[k >> 6] |= mask;
  } else {
    bits_[k >> 6] &= ~mask;
  }
}

std::size_t Adjacency::edge_count() const {
  std::size_t c = 0;
  for (std::uint64_t w : bits_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

double Adjacency::density() const {
  return pairs() == 0 ? 0.0
                      : static_cast<double>(edge_count()) /
                            static_cast<double>(pairs());
}

std::vector<std::pair<std::size_t, std::size_t>> Adjacency::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(edge_count());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j, ++k) {
      if ((bits_[k >> 6] >> (k & 63)) & 1u) out.emplace_back(i, j);
    }
  }
  return out;
}

Latents Latents::positions(std::vector<double> xi) {
  for (double x : xi) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ConfigError("latent positions must lie in [0, 1]");
    }
  }
  Latents l;
  l.data_ = std::move(xi);
  return l;
}

Latents Latents::labels(std::vector<int> z, std::size_t blocks) {
  for (int a : z) {
    if (a < 0 || static_cast<std::size_t>(a) >= blocks) {
      throw ConfigError("label " + std::to_string(a + 1) + " outside 1.." +
                        std::to_string(blocks));
    }
  }
  Latents l;
  l.data_ = LabelData{std::move(z), blocks};
  return l;
}

std::size_t Latents::size() const {
  if (const auto* xi = std::get_if<std::vector<double>>(&data_)) {
    return xi->size();
  }
  return std::get<LabelData>(data_).z.size();
}

std::size_t Latents::blocks() const {
  if (const auto* l = std::get_if<LabelData>(&data_)) return l->blocks;
  return 0;
}

const std::vector<double>& Latents::xi() const {
  if (const auto* xi = std::get_if<std::vector<double>>(&data_)) return *xi;
  throw ConfigError("latents are block labels, not positions");
}

const std::vector<int>& Latents::z() const {
  if (const auto* l = std::get_if<LabelData>(&data_)) return l->z;
  throw ConfigError("latents are positions, not block labels");
}

Adjacency permute(const Adjacency& a, std::span<const std::size_t> perm) {
  const std::size_t n = a.nodes();
  if (perm.size() != n) throw ModelError("permutation length mismatch");
  Adjacency out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a(perm[i], perm[j])) out.set(i, j);
    }
  }
  return out;
}

}  // namespace multicoh
