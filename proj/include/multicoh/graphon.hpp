#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multicoh/bernoulli.hpp"
#include "multicoh/matrix.hpp"

namespace multicoh {

// Partition of [0, 1] into K consecutive intervals (b_{a-1}, b_a], with the
// first interval closed at 0.
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<double> boundaries);

  // Boundaries H_a / n where H_a are cumulative block sizes.
  static BlockPartition from_sizes(std::span<const std::size_t> sizes);
  // Boundaries at cumulative sums of a probability vector.
  static BlockPartition from_proportions(std::span<const double> weights);
  static BlockPartition single() { return BlockPartition({0.0, 1.0}); }

  std::size_t blocks() const { return boundaries_.size() - 1; }
  std::size_t block_of(double x) const;
  double midpoint(std::size_t a) const {
    return 0.5 * (boundaries_[a] + boundaries_[a + 1]);
  }
  double width(std::size_t a) const {
    return boundaries_[a + 1] - boundaries_[a];
  }
  std::span<const double> boundaries() const { return boundaries_; }

  friend bool operator==(const BlockPartition&,
                         const BlockPartition&) = default;

 private:
  std::vector<double> boundaries_;
};

// Piecewise-constant symmetric function on the grid induced by a partition.
class StepFunction {
 public:
  StepFunction(BlockPartition partition, BlockMatrix values);

  const BlockPartition& partition() const { return partition_; }
  const BlockMatrix& values() const { return values_; }
  double operator()(double x, double y) const {
    return values_(partition_.block_of(x), partition_.block_of(y));
  }

 private:
  BlockPartition partition_;
  BlockMatrix values_;
};

// Symmetric real function on [0,1]^2: either a step function or a pure
// black-box evaluator. Evaluators are always called with x <= y.
class SymmetricFunction {
 public:
  using Evaluator = std::function<double(double, double)>;

  static SymmetricFunction constant(double c);
  static SymmetricFunction step(StepFunction fn);
  // `sup` / `inf`, when known analytically, make bound checks exact;
  // otherwise they are estimated on a 256 x 256 midpoint grid.
  static SymmetricFunction evaluator(std::string name, Evaluator fn,
                                     std::optional<double> sup = std::nullopt,
                                     std::optional<double> inf = std::nullopt);

  // The zero function.
  SymmetricFunction();

  double operator()(double x, double y) const;

  const StepFunction* as_step() const { return step_ ? &*step_ : nullptr; }
  const std::string& name() const { return name_; }

  double sup() const { return sup_; }
  double inf() const { return inf_; }
  // Exact for step functions; midpoint rule on a 1024 x 1024 grid otherwise.
  double l1_norm() const;

  SymmetricFunction scaled(double c) const;

 private:
  std::string name_;
  std::optional<StepFunction> step_;
  Evaluator eval_;
  double sup_ = 0.0;
  double inf_ = 0.0;
};

// Built-in smooth graph limits.
SymmetricFunction gravity_graphon(double c);  // c * x * y
SymmetricFunction distance_graphon(double c, double beta);  // c*exp(-beta|x-y|)

enum class CrossKind { moment, coherence };

// Two-layer scaled graph-limit model. Edge probabilities are rho * f_l; the
// joint probability is rho^gamma * f12 (moment form) or the conditional
// correlation is rho^(gamma-1) * r0 (coherence form).
class GraphonPairModel {
 public:
  static GraphonPairModel with_cross_moment(SymmetricFunction f1,
                                            SymmetricFunction f2,
                                            SymmetricFunction f12, double rho,
                                            int gamma = 2);
  static GraphonPairModel with_coherence(SymmetricFunction f1,
                                         SymmetricFunction f2,
                                         SymmetricFunction r0, double rho,
                                         int gamma = 2);

  const SymmetricFunction& f1() const { return f1_; }
  const SymmetricFunction& f2() const { return f2_; }
  const SymmetricFunction& cross() const { return cross_; }
  CrossKind cross_kind() const { return kind_; }
  double rho() const { return rho_; }
  int gamma() const { return gamma_; }
  bool normalized() const { return normalized_; }

  // Same functions under a different sparsity scale.
  GraphonPairModel with_rho(double rho) const;

  // Common block partition when every stored function is a step function
  // on the same partition.
  std::optional<BlockPartition> shared_partition() const;

 private:
  GraphonPairModel(SymmetricFunction f1, SymmetricFunction f2, CrossKind kind,
                   SymmetricFunction cross, double rho, int gamma,
                   bool normalized);
  friend GraphonPairModel normalize_l1(const GraphonPairModel& model);

  SymmetricFunction f1_, f2_;
  CrossKind kind_;
  SymmetricFunction cross_;
  double rho_;
  int gamma_;
  bool normalized_;
};

// Correlated stochastic blockmodel. Labels are 0-based block indices.
struct BlockCoherenceSpec {
  BlockMatrix theta1;
  BlockMatrix theta2;
  BlockMatrix varrho;
  std::vector<int> labels;
  // h_a; derived from `labels` when empty.
  std::vector<std::size_t> block_sizes;

  std::size_t blocks() const { return theta1.size(); }
  std::vector<std::size_t> resolved_block_sizes() const;
};

struct BlockGraphons {
  GraphonPairModel model;  // f1 = theta1, f2 = theta2, cross moment = varrho
  SymmetricFunction coherence;
};

double conditional_correlation(double rho, double f1v, double f2v,
                               double f12v);
double edge_coherence(double r, double rho, int gamma);
double sparse_limit_coherence(double f1v, double f2v, double f12v);

// Per-block coherence (varrho - t1 t2) / sqrt(t1 t2 (1-t1)(1-t2)); zero on
// degenerate blocks.
double block_coherence(double theta1, double theta2, double varrho);

BivariateEdgeSpec edge_probs_at(const GraphonPairModel& model, double x,
                                double y);

BlockGraphons blockmodel_to_graphons(const BlockCoherenceSpec& spec);

struct Violation {
  double x = 0.0;
  double y = 0.0;
  std::optional<std::size_t> block_a, block_b;
  double p1 = 0.0, p2 = 0.0, r = 0.0;
  double lo = 0.0, hi = 0.0;
  std::string reason;
};

struct AdmissibilityReport {
  std::vector<Violation> violations;
  std::size_t points_checked = 0;
  bool exact = false;  // every cell of a step model checked
  bool admissible() const { return violations.empty(); }
};

inline constexpr std::size_t kDefaultGridResolution = 256;

AdmissibilityReport admissibility_report(
    const GraphonPairModel& model,
    std::size_t grid_resolution = kDefaultGridResolution);

GraphonPairModel normalize_l1(const GraphonPairModel& model);

}  // namespace multicoh
