#include "multicoh/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multicoh/errors.hpp"

namespace multicoh {

namespace {

constexpr int kMaxLayers = 20;

void check_layers(int d) {
  if (d < 1 || d > kMaxLayers) {
    throw ValidityError("layer count must be in [1, " +
                        std::to_string(kMaxLayers) + "], got " +
                        std::to_string(d));
  }
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << name << " = " << p << " is not a probability";
    throw ValidityError(os.str());
  }
}

}  // namespace

std::string format_outcome(Outcome a, int d) {
  std::string s = "(";
  for (int k = 0; k < d; ++k) {
    if (k) s += ',';
    s += ((a >> k) & 1u) ? '1' : '0';
  }
  return s + ")";
}

JointEdgeDistribution::JointEdgeDistribution(int d, std::vector<double> probs)
    : d_(d), probs_(std::move(probs)) {
  check_layers(d);
  if (probs_.size() != (std::size_t{1} << d)) {
    throw ValidityError("table for d = " + std::to_string(d) + " needs " +
                        std::to_string(std::size_t{1} << d) + " entries, got " +
                        std::to_string(probs_.size()));
  }
  double total = 0.0;
  for (Outcome a = 0; a < probs_.size(); ++a) {
    double& p = probs_[a];
    if (p < 0.0 && p >= -kClampTolerance) p = 0.0;
    if (p > 1.0 && p <= 1.0 + kClampTolerance) p = 1.0;
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream os;
      os << "probability of outcome " << format_outcome(a, d) << " is " << p;
      throw ValidityError(os.str());
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "table mass is " << total << ", expected 1";
    throw ValidityError(os.str());
  }
}

JointEdgeDistribution JointEdgeDistribution::bivariate(double p00, double p01,
                                                       double p10, double p11) {
  return JointEdgeDistribution(2, {p00, p10, p01, p11});
}

double JointEdgeDistribution::p(int a1, int a2) const {
  if (d_ != 2) throw ValidityError("p(a1, a2) requires a bivariate table");
  return probs_[static_cast<Outcome>(a1) | (static_cast<Outcome>(a2) << 1)];
}

MomentVector::MomentVector(int d, std::vector<double> moments) : d_(d) {
  check_layers(d);
  const std::size_t n = std::size_t{1} << d;
  if (moments.size() != n - 1) {
    throw ValidityError("moment vector for d = " + std::to_string(d) +
                        " needs " + std::to_string(n - 1) + " entries, got " +
                        std::to_string(moments.size()));
  }
  moments_.reserve(n);
  moments_.push_back(1.0);
  moments_.insert(moments_.end(), moments.begin(), moments.end());
}

bool is_degenerate(double p) { return p <= 0.0 || p >= 1.0; }

CorrBounds corr_bounds(double p1, double p2) {
  check_probability(p1, "p1");
  check_probability(p2, "p2");
  if (is_degenerate(p1) || is_degenerate(p2)) {
    std::ostringstream os;
    os << "correlation undefined for degenerate marginals (" << p1 << ", "
       << p2 << ")";
    throw DegenerateError(os.str());
  }
  const double q1 = 1.0 - p1;
  const double q2 = 1.0 - p2;
  const double lo = std::max(-std::sqrt((p1 * p2) / (q1 * q2)),
                             -std::sqrt((q1 * q2) / (p1 * p2)));
  const double hi = std::min(std::sqrt((p1 * q2) / (p2 * q1)),
                             std::sqrt((q1 * p2) / (p1 * q2)));
  return {lo, hi};
}

JointEdgeDistribution from_spec(const BivariateEdgeSpec& spec) {
  const auto [p1, p2, r] = spec;
  check_probability(p1, "p1");
  check_probability(p2, "p2");
  if (!(r >= -1.0 - kClampTolerance && r <= 1.0 + kClampTolerance)) {
    std::ostringstream os;
    os << "correlation " << r << " outside [-1, 1]";
    throw AdmissibilityError(os.str(),
                             r < 0 ? BoundSide::lower : BoundSide::upper,
                             r < 0 ? -1.0 : 1.0);
  }

  double p11 = p1 * p2;
  if (is_degenerate(p1) || is_degenerate(p2)) {
    if (std::abs(r) > kClampTolerance) {
      std::ostringstream os;
      os << "correlation " << r << " requested for degenerate marginals ("
         << p1 << ", " << p2 << "); only 0 is admissible";
      throw AdmissibilityError(os.str(),
                               r < 0 ? BoundSide::lower : BoundSide::upper,
                               0.0);
    }
  } else {
    const auto [lo, hi] = corr_bounds(p1, p2);
    std::ostringstream os;
    os.precision(10);
    if (r < lo - kClampTolerance) {
      os << "correlation " << r << " below lower bound " << lo
         << " for marginals (" << p1 << ", " << p2 << ")";
      throw AdmissibilityError(os.str(), BoundSide::lower, lo);
    }
    if (r > hi + kClampTolerance) {
      os << "correlation " << r << " above upper bound " << hi
         << " for marginals (" << p1 << ", " << p2 << ")";
      throw AdmissibilityError(os.str(), BoundSide::upper, hi);
    }
    p11 += r * std::sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2));
  }
  const double p10 = p1 - p11;
  const double p01 = p2 - p11;
  const double p00 = 1.0 - p1 - p2 + p11;
  return JointEdgeDistribution::bivariate(p00, p01, p10, p11);
}

BivariateEdgeSpec to_spec(const JointEdgeDistribution& dist) {
  if (dist.layers() != 2) {
    throw ValidityError("to_spec requires a bivariate table, got d = " +
                        std::to_string(dist.layers()));
  }
  const double p11 = dist.p(1, 1);
  const double p1 = dist.p(1, 0) + p11;
  const double p2 = dist.p(0, 1) + p11;
  if (is_degenerate(p1) || is_degenerate(p2)) return {p1, p2, 0.0};
  const double r =
      (p11 - p1 * p2) / std::sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2));
  return {p1, p2, std::clamp(r, -1.0, 1.0)};
}

MomentVector probs_to_moments(const JointEdgeDistribution& dist) {
  const int d = dist.layers();
  const std::size_t n = std::size_t{1} << d;
  // Superset sums: m_S = sum over outcomes a containing S of p_a.
  std::vector<double> m(dist.probs().begin(), dist.probs().end());
  for (int k = 0; k < d; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t s = 0; s < n; ++s) {
      if (!(s & bit)) m[s] += m[s | bit];
    }
  }
  return MomentVector(d, std::vector<double>(m.begin() + 1, m.end()));
}

JointEdgeDistribution moments_to_probs(const MomentVector& mv) {
  const int d = mv.layers();
  const std::size_t n = std::size_t{1} << d;
  // Moebius inversion of the superset sums.
  std::vector<double> p(mv.with_empty_set().begin(), mv.with_empty_set().end());
  for (int k = 0; k < d; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t s = 0; s < n; ++s) {
      if (!(s & bit)) p[s] -= p[s | bit];
    }
  }
  for (Outcome a = 0; a < n; ++a) {
    if (p[a] < -kClampTolerance || p[a] > 1.0 + kClampTolerance) {
      std::ostringstream os;
      os << "moments incompatible: outcome " << format_outcome(a, d)
         << " would have probability " << p[a];
      throw CompatibilityError(os.str(), a);
    }
  }
  return JointEdgeDistribution(d, std::move(p));
}

Outcome outcome_for_uniform(const JointEdgeDistribution& dist, double u) {
  const auto probs = dist.probs();
  double acc = 0.0;
  Outcome last_positive = 0;
  for (Outcome a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    acc += probs[a];
    last_positive = a;
    if (u < acc) return a;
  }
  return last_positive;
}

Outcome sample_edge(const JointEdgeDistribution& dist, RandomStream& rng) {
  return outcome_for_uniform(dist, rng.uniform());
}

}  // namespace multicoh
