#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "multicoh/sample.hpp"

namespace multicoh {

struct HadamardMoment {
  Adjacency product;
  double mean = 0.0;  // off-diagonal mean: empirical joint edge probability
};

HadamardMoment hadamard_moment(const Adjacency& a1, const Adjacency& a2);

enum class DensityScope { cross_layer, per_layer };

// Mean off-diagonal density averaged over layers.
double density_hat(const MultiplexSample& sample);
std::vector<double> density_per_layer(const MultiplexSample& sample);

// A K x K table of optional values. Missing entries mark empty or
// degenerate block pairs.
class EstimateMatrix {
 public:
  EstimateMatrix() = default;
  explicit EstimateMatrix(std::size_t k) : k_(k), data_(k * k) {}
  std::size_t size() const { return k_; }
  std::optional<double>& operator()(std::size_t a, std::size_t b) {
    return data_[a * k_ + b];
  }
  const std::optional<double>& operator()(std::size_t a, std::size_t b) const {
    return data_[a * k_ + b];
  }
  friend bool operator==(const EstimateMatrix&,
                         const EstimateMatrix&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::optional<double>> data_;
};

// Block-level joint outcome counts of one layer pair.
struct BlockCounts {
  std::size_t n00 = 0, n10 = 0, n01 = 0, n11 = 0;
  std::size_t total() const { return n00 + n10 + n01 + n11; }
  friend bool operator==(const BlockCounts&, const BlockCounts&) = default;
};

struct CoherenceEstimate {
  std::size_t blocks = 0;
  EstimateMatrix theta1_hat, theta2_hat, varrho_hat, r_hat, r0_hat;
  std::vector<BlockCounts> cells;  // K x K, row-major
  double rho_hat = 0.0;
  int gamma = 2;

  std::size_t count(std::size_t a, std::size_t b) const {
    return cells[a * blocks + b].total();
  }
  friend bool operator==(const CoherenceEstimate&,
                         const CoherenceEstimate&) = default;
};

struct EstimationOptions {
  int gamma = 2;
  // Density scale used for r0. Unset means estimate it from the data.
  std::optional<double> rho;
  DensityScope density = DensityScope::cross_layer;
};

// Plug-in block estimates for two layers with known 0-based labels. When
// options.rho is unset the density scale is estimated from the two layers.
CoherenceEstimate block_estimates(const Adjacency& a1, const Adjacency& a2,
                                  const std::vector<int>& labels,
                                  std::size_t blocks,
                                  const EstimationOptions& options = {});

using LayerPair = std::pair<std::size_t, std::size_t>;

// One estimate per unordered layer pair (m1 < m2), 0-based layer indices.
std::map<LayerPair, CoherenceEstimate> pairwise_coherence_summary(
    const MultiplexSample& sample, const std::vector<int>& labels,
    std::size_t blocks, const EstimationOptions& options = {});

// CSV rows "a,b,count,theta1,theta2,varrho,r,r0" with 1-based blocks and
// NA for missing entries; one row per block pair with a <= b.
inline constexpr const char* kEstimateCsvHeader =
    "a,b,count,theta1,theta2,varrho,r,r0";
void write_estimate_rows(std::ostream& out, const CoherenceEstimate& est,
                         const std::string& prefix = "");
void write_estimate_csv(std::ostream& out, const CoherenceEstimate& est);

// Weighted graph over blocks: header "# multicoh coherence v1 K=<K>" then
// "a<TAB>b<TAB>r0" for every defined entry with a <= b.
void write_coherence_graph(std::ostream& out, const CoherenceEstimate& est);

}  // namespace multicoh
