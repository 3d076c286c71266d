#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace multicoh {

// Simple undirected graph on n nodes stored as a bit-packed upper triangle.
// Reads are symmetric and the diagonal is always zero.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(std::size_t n);

  std::size_t nodes() const { return n_; }
  std::size_t pairs() const { return n_ < 2 ? 0 : n_ * (n_ - 1) / 2; }

  bool operator()(std::size_t i, std::size_t j) const {
    if (i == j) return false;
    const std::size_t k = index(i, j);
    return (bits_[k >> 6] >> (k & 63)) & 1u;
  }
  // Requires i != j.
  void set(std::size_t i, std::size_t j, bool value = true);

  std::size_t edge_count() const;
  double density() const;

  // Upper-triangle pairs (i, j), i < j, in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Latent node variables: positions xi in [0, 1] or 0-based block labels.
class Latents {
 public:
  Latents() = default;
  static Latents positions(std::vector<double> xi);
  static Latents labels(std::vector<int> z, std::size_t blocks);

  bool has_labels() const { return std::holds_alternative<LabelData>(data_); }
  std::size_t size() const;
  std::size_t blocks() const;

  // Throw ConfigError on the wrong kind.
  const std::vector<double>& xi() const;
  const std::vector<int>& z() const;

  friend bool operator==(const Latents&, const Latents&) = default;

 private:
  struct LabelData {
    std::vector<int> z;
    std::size_t blocks = 0;
    friend bool operator==(const LabelData&, const LabelData&) = default;
  };
  std::variant<std::vector<double>, LabelData> data_;
};

struct MultiplexSample {
  Latents latents;
  std::vector<Adjacency> layers;

  std::size_t nodes() const { return latents.size(); }
  std::size_t layer_count() const { return layers.size(); }

  friend bool operator==(const MultiplexSample&,
                         const MultiplexSample&) = default;
};

// Relabels nodes: node i of the result is node perm[i] of the input.
Adjacency permute(const Adjacency& a, std::span<const std::size_t> perm);

}  // namespace multicoh
