#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "multicoh/graphon.hpp"
#include "multicoh/sample.hpp"

namespace multicoh {

// How node latents are produced.
struct LatentLaw {
  enum class Kind { uniform, multinomial, contiguous };
  Kind kind = Kind::uniform;
  // multinomial: block probabilities pi. contiguous: block weights,
  // apportioned to n by largest remainder and laid out in label order.
  std::vector<double> weights;

  static LatentLaw uniform() { return {}; }
  static LatentLaw multinomial(std::vector<double> pi) {
    return {Kind::multinomial, std::move(pi)};
  }
  static LatentLaw contiguous(std::vector<double> weights) {
    return {Kind::contiguous, std::move(weights)};
  }
};

Latents sample_latents(std::size_t n, const LatentLaw& law,
                       std::uint64_t seed);

// Integer block sizes summing to n, proportional to `weights`.
std::vector<std::size_t> apportion(std::span<const double> weights,
                                   std::size_t n);

// Positions at which model functions are evaluated for each node. Labels
// map to the midpoint of their block in `partition`.
std::vector<double> node_positions(
    const Latents& latents, const std::optional<BlockPartition>& partition);

// Mean of the switching variables V in the mixture construction, as a
// function of the latent pair.
using VmeanFunction = std::function<double(double, double)>;

// vmean = sqrt(r) where r is the model's conditional correlation, so the
// sampled pair has exactly that correlation.
VmeanFunction target_correlation_vmean(const GraphonPairModel& model);
// vmean = rho * sqrt(r0) with r0 the model's edge coherence; the sampled
// correlation is then rho^2 * r0.
VmeanFunction scaled_coherence_vmean(const GraphonPairModel& model);

// A = (1 - V) U + V W per layer with U, W ~ Bern(theta), V ~ Bern(vmean).
// Requires equal marginals; throws ModelError for negative vmean.
MultiplexSample sample_mixture_pair(const GraphonPairModel& model,
                                    const Latents& latents,
                                    const VmeanFunction& vmean,
                                    std::uint64_t seed);

// Per-edge categorical draw from the exact bivariate table.
MultiplexSample sample_joint_table_pair(const GraphonPairModel& model,
                                        const Latents& latents,
                                        std::uint64_t seed);

struct ModulationSpec {
  SymmetricFunction f1;
  SymmetricFunction h;
  double rho = 1.0;

  void validate() const;
  std::optional<BlockPartition> shared_partition() const;
};

// Outcome table: P(1,1) = rho h f1, P(0,1) = 0, P(1,0) = rho f1 (1 - h).
JointEdgeDistribution modulation_outcomes(const ModulationSpec& spec, double x,
                                          double y);
// sqrt(h (1 - rho f1) / (1 - rho h f1)); 0 where either layer is degenerate.
double modulation_correlation(const ModulationSpec& spec, double x, double y);

// Layer 1 ~ Bern(rho f1); layer 2 | layer 1 ~ Bern(h * layer 1).
MultiplexSample sample_modulation_pair(const ModulationSpec& spec,
                                       const Latents& latents,
                                       std::uint64_t seed);

enum class ThinningMode { independent, shared };

// Keeps each edge with probability `keep`.
MultiplexSample thin(const MultiplexSample& sample, double keep,
                     ThinningMode mode, std::uint64_t seed);

// f1 = g, f2 = 1 - c g, conditionally independent layers.
GraphonPairModel build_negative_pair_model(const SymmetricFunction& g,
                                           double c, double rho);

enum class Mechanism { mixture, joint_table, modulation };

enum class VmeanConvention { target_correlation, scaled_coherence };

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::variant<BlockCoherenceSpec, GraphonPairModel, ModulationSpec> model;
  Mechanism mechanism = Mechanism::joint_table;
  LatentLaw latents;
  VmeanConvention vmean = VmeanConvention::target_correlation;
};

// Latents are drawn first from their own stream, so configs that differ
// only in mechanism share latents. A BlockCoherenceSpec with labels uses
// those labels (and ignores `n` and `latents`).
MultiplexSample generate(const SamplerConfig& config);

struct EdgeRef {
  std::size_t i;
  std::size_t j;
  int layer;  // 0 or 1
};

struct CovarianceDecomposition {
  double latent_term = 0.0;       // cov over xi of conditional means
  double conditional_term = 0.0;  // mean over xi of conditional covariance
  double total = 0.0;             // latent_term + conditional_term
  double sampled = 0.0;           // covariance of sampled edge indicators
};

// Monte-Carlo law-of-total-covariance split for two edge variables under
// uniform latents.
CovarianceDecomposition covariance_decomposition(const GraphonPairModel& model,
                                                 EdgeRef first, EdgeRef second,
                                                 std::size_t n_mc,
                                                 std::uint64_t seed);

// Correlation of the two layers' indicators for one edge, marginal over
// uniform latents.
double unconditional_edge_correlation(const GraphonPairModel& model,
                                      std::size_t n_mc, std::uint64_t seed);

}  // namespace multicoh
