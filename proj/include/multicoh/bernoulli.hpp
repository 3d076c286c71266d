#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "multicoh/rng.hpp"

namespace multicoh {

// Outcome of one edge across d layers, as a bit mask: bit k set means an
// edge is present in layer k+1. For d = 2 the masks 0,1,2,3 are the
// outcomes 00, 10, 01, 11 (written as a1 a2).
using Outcome = std::uint32_t;

// Entries at or above -kClampTolerance are clamped to zero; anything more
// negative is rejected.
inline constexpr double kClampTolerance = 1e-12;
inline constexpr double kMassTolerance = 1e-12;

std::string format_outcome(Outcome a, int d);

// Full probability table of a d-variate Bernoulli vector.
class JointEdgeDistribution {
 public:
  // `probs` is indexed by outcome mask and must have 2^d entries.
  JointEdgeDistribution(int d, std::vector<double> probs);

  // Bivariate table from p_{a1 a2}.
  static JointEdgeDistribution bivariate(double p00, double p01, double p10,
                                         double p11);

  int layers() const { return d_; }
  double operator[](Outcome a) const { return probs_[a]; }
  // Bivariate accessor, p(a1, a2); requires d = 2.
  double p(int a1, int a2) const;
  std::span<const double> probs() const { return probs_; }

  friend bool operator==(const JointEdgeDistribution&,
                         const JointEdgeDistribution&) = default;

 private:
  int d_;
  std::vector<double> probs_;
};

// Marginals plus Pearson correlation of a two-layer edge.
struct BivariateEdgeSpec {
  double p1 = 0.0;
  double p2 = 0.0;
  double r = 0.0;
};

// Uncentred cross-moments m_S = E[prod_{k in S} A_k] for every nonempty
// subset S of the layers, indexed by subset mask.
class MomentVector {
 public:
  // `moments` has 2^d - 1 entries: element s-1 holds m_S for mask s.
  MomentVector(int d, std::vector<double> moments);

  int layers() const { return d_; }
  // Mask 0 (empty set) returns 1.
  double operator[](std::uint32_t subset) const { return moments_[subset]; }
  std::span<const double> with_empty_set() const { return moments_; }

 private:
  int d_;
  std::vector<double> moments_;  // 2^d entries, [0] == 1
};

struct CorrBounds {
  double lo;
  double hi;
};

// Attainable correlation range for Bernoulli(p1), Bernoulli(p2).
// Throws DegenerateError unless both probabilities lie in (0, 1).
CorrBounds corr_bounds(double p1, double p2);

bool is_degenerate(double p);

// Throws AdmissibilityError when r falls outside corr_bounds (closed).
JointEdgeDistribution from_spec(const BivariateEdgeSpec& spec);
BivariateEdgeSpec to_spec(const JointEdgeDistribution& dist);

MomentVector probs_to_moments(const JointEdgeDistribution& dist);
// Inclusion-exclusion over the subset lattice. Throws CompatibilityError
// naming the first outcome whose probability comes out negative.
JointEdgeDistribution moments_to_probs(const MomentVector& mv);

// Categorical draw of one outcome.
Outcome sample_edge(const JointEdgeDistribution& dist, RandomStream& rng);
Outcome outcome_for_uniform(const JointEdgeDistribution& dist, double u);

}  // namespace multicoh
