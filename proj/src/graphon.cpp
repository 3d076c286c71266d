#include "multicoh/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "multicoh/errors.hpp"

namespace multicoh {

namespace {

constexpr std::size_t kBoundGrid = 256;
constexpr std::size_t kQuadratureGrid = 1024;
constexpr double kBoundTolerance = 1e-12;

std::string block_pair(std::size_t a, std::size_t b) {
  return "(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockPartition

BlockPartition::BlockPartition(std::vector<double> boundaries)
    : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2 || boundaries_.front() != 0.0 ||
      boundaries_.back() != 1.0) {
    throw ConfigError("block boundaries must start at 0 and end at 1");
  }
  for (std::size_t a = 1; a < boundaries_.size(); ++a) {
    if (!(boundaries_[a] > boundaries_[a - 1])) {
      throw ConfigError("block boundaries must be strictly increasing");
    }
  }
}

BlockPartition BlockPartition::from_sizes(std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw ConfigError("at least one block is required");
  std::size_t n = 0;
  for (std::size_t h : sizes) {
    if (h == 0) throw ConfigError("block sizes must be positive");
    n += h;
  }
  std::vector<double> b{0.0};
  std::size_t cum = 0;
  for (std::size_t h : sizes) {
    cum += h;
    b.push_back(static_cast<double>(cum) / static_cast<double>(n));
  }
  return BlockPartition(std::move(b));
}

BlockPartition BlockPartition::from_proportions(
    std::span<const double> weights) {
  if (weights.empty()) throw ConfigError("at least one block is required");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("block proportions must be positive");
    total += w;
  }
  std::vector<double> b{0.0};
  double cum = 0.0;
  for (std::size_t a = 0; a + 1 < weights.size(); ++a) {
    cum += weights[a];
    b.push_back(cum / total);
  }
  b.push_back(1.0);
  return BlockPartition(std::move(b));
}

std::size_t BlockPartition::block_of(double x) const {
  const auto it =
      std::lower_bound(boundaries_.begin() + 1, boundaries_.end() - 1, x);
  return static_cast<std::size_t>(it - (boundaries_.begin() + 1));
}

// ---------------------------------------------------------------------------
// StepFunction / SymmetricFunction

StepFunction::StepFunction(BlockPartition partition, BlockMatrix values)
    : partition_(std::move(partition)), values_(std::move(values)) {
  if (values_.size() != partition_.blocks()) {
    throw ConfigError("step function has " + std::to_string(values_.size()) +
                      " value rows for " +
                      std::to_string(partition_.blocks()) + " blocks");
  }
  if (!values_.is_symmetric()) {
    throw ConfigError("step function values must be symmetric");
  }
}

SymmetricFunction::SymmetricFunction()
    : name_("step"),
      step_(StepFunction(BlockPartition::single(), BlockMatrix(1, 0.0))) {}

SymmetricFunction SymmetricFunction::constant(double c) {
  return step(StepFunction(BlockPartition::single(), BlockMatrix(1, c)));
}

SymmetricFunction SymmetricFunction::step(StepFunction fn) {
  SymmetricFunction f;
  f.name_ = "step";
  const auto& v = fn.values();
  f.sup_ = v(0, 0);
  f.inf_ = v(0, 0);
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = 0; b < v.size(); ++b) {
      f.sup_ = std::max(f.sup_, v(a, b));
      f.inf_ = std::min(f.inf_, v(a, b));
    }
  }
  f.step_ = std::move(fn);
  return f;
}

SymmetricFunction SymmetricFunction::evaluator(std::string name, Evaluator fn,
                                               std::optional<double> sup,
                                               std::optional<double> inf) {
  SymmetricFunction f;
  f.step_.reset();
  f.name_ = std::move(name);
  f.eval_ = std::move(fn);
  if (!sup || !inf) {
    double hi = -INFINITY, lo = INFINITY;
    for (std::size_t i = 0; i < kBoundGrid; ++i) {
      const double x = (i + 0.5) / kBoundGrid;
      for (std::size_t j = i; j < kBoundGrid; ++j) {
        const double v = f.eval_(x, (j + 0.5) / kBoundGrid);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
    }
    f.sup_ = sup.value_or(hi);
    f.inf_ = inf.value_or(lo);
  } else {
    f.sup_ = *sup;
    f.inf_ = *inf;
  }
  return f;
}

double SymmetricFunction::operator()(double x, double y) const {
  if (step_) return (*step_)(x, y);
  return x <= y ? eval_(x, y) : eval_(y, x);
}

double SymmetricFunction::l1_norm() const {
  if (step_) {
    const auto& part = step_->partition();
    const auto& v = step_->values();
    double s = 0.0;
    for (std::size_t a = 0; a < part.blocks(); ++a) {
      for (std::size_t b = 0; b < part.blocks(); ++b) {
        s += std::abs(v(a, b)) * part.width(a) * part.width(b);
      }
    }
    return s;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < kQuadratureGrid; ++i) {
    const double x = (i + 0.5) / kQuadratureGrid;
    for (std::size_t j = 0; j < kQuadratureGrid; ++j) {
      s += std::abs((*this)(x, (j + 0.5) / kQuadratureGrid));
    }
  }
  return s / static_cast<double>(kQuadratureGrid * kQuadratureGrid);
}

SymmetricFunction SymmetricFunction::scaled(double c) const {
  if (step_) {
    BlockMatrix v = step_->values();
    for (std::size_t a = 0; a < v.size(); ++a) {
      for (std::size_t b = 0; b < v.size(); ++b) v(a, b) *= c;
    }
    auto out = step(StepFunction(step_->partition(), std::move(v)));
    out.name_ = name_;
    return out;
  }
  SymmetricFunction f;
  f.step_.reset();
  f.name_ = name_;
  f.eval_ = [inner = eval_, c](double x, double y) { return c * inner(x, y); };
  f.sup_ = c >= 0 ? c * sup_ : c * inf_;
  f.inf_ = c >= 0 ? c * inf_ : c * sup_;
  return f;
}

SymmetricFunction gravity_graphon(double c) {
  if (!(c >= 0.0)) throw ConfigError("gravity graphon needs c >= 0");
  return SymmetricFunction::evaluator(
      "gravity", [c](double x, double y) { return c * x * y; }, c, 0.0);
}

SymmetricFunction distance_graphon(double c, double beta) {
  if (!(c >= 0.0) || !(beta >= 0.0)) {
    throw ConfigError("distance graphon needs c >= 0 and beta >= 0");
  }
  return SymmetricFunction::evaluator(
      "distance",
      [c, beta](double x, double y) { return c * std::exp(-beta * (y - x)); },
      c, c * std::exp(-beta));
}

// ---------------------------------------------------------------------------
// GraphonPairModel

GraphonPairModel::GraphonPairModel(SymmetricFunction f1, SymmetricFunction f2,
                                   CrossKind kind, SymmetricFunction cross,
                                   double rho, int gamma, bool normalized)
    : f1_(std::move(f1)),
      f2_(std::move(f2)),
      kind_(kind),
      cross_(std::move(cross)),
      rho_(rho),
      gamma_(gamma),
      normalized_(normalized) {
  if (!(rho_ > 0.0 && rho_ <= 1.0)) {
    std::ostringstream os;
    os << "sparsity scale rho = " << rho_ << " must lie in (0, 1]";
    throw ConfigError(os.str());
  }
  if (gamma_ != 1 && gamma_ != 2) {
    throw ConfigError("gamma must be 1 or 2, got " + std::to_string(gamma_));
  }
  for (const auto* f : {&f1_, &f2_}) {
    if (f->inf() < 0.0) throw ConfigError("graph limits must be nonnegative");
    if (rho_ * f->sup() > 1.0 + kBoundTolerance) {
      std::ostringstream os;
      os << "rho * sup f = " << rho_ * f->sup() << " exceeds 1";
      throw ConfigError(os.str());
    }
  }
  if (kind_ == CrossKind::moment && cross_.inf() < 0.0) {
    throw ConfigError("cross-moment function must be nonnegative");
  }
}

GraphonPairModel GraphonPairModel::with_cross_moment(SymmetricFunction f1,
                                                     SymmetricFunction f2,
                                                     SymmetricFunction f12,
                                                     double rho, int gamma) {
  return GraphonPairModel(std::move(f1), std::move(f2), CrossKind::moment,
                          std::move(f12), rho, gamma, false);
}

GraphonPairModel GraphonPairModel::with_coherence(SymmetricFunction f1,
                                                  SymmetricFunction f2,
                                                  SymmetricFunction r0,
                                                  double rho, int gamma) {
  return GraphonPairModel(std::move(f1), std::move(f2), CrossKind::coherence,
                          std::move(r0), rho, gamma, false);
}

GraphonPairModel GraphonPairModel::with_rho(double rho) const {
  return GraphonPairModel(f1_, f2_, kind_, cross_, rho, gamma_, false);
}

std::optional<BlockPartition> GraphonPairModel::shared_partition() const {
  const StepFunction* s1 = f1_.as_step();
  const StepFunction* s2 = f2_.as_step();
  const StepFunction* s12 = cross_.as_step();
  if (!s1 || !s2 || !s12) return std::nullopt;
  if (s1->partition() == s2->partition() &&
      s1->partition() == s12->partition()) {
    return s1->partition();
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Pointwise formulas

double conditional_correlation(double rho, double f1v, double f2v,
                               double f12v) {
  const double p1 = rho * f1v;
  const double p2 = rho * f2v;
  if (is_degenerate(p1) || is_degenerate(p2)) {
    std::ostringstream os;
    os << "conditional correlation undefined: edge probabilities (" << p1
       << ", " << p2 << ") have zero variance";
    throw DegenerateError(os.str());
  }
  return rho * (f12v - f1v * f2v) /
         std::sqrt(f1v * (1.0 - rho * f1v) * f2v * (1.0 - rho * f2v));
}

double edge_coherence(double r, double rho, int gamma) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw ConfigError("rho must lie in (0, 1]");
  }
  if (gamma != 1 && gamma != 2) throw ConfigError("gamma must be 1 or 2");
  return gamma == 2 ? r / rho : r;
}

double sparse_limit_coherence(double f1v, double f2v, double f12v) {
  if (!(f1v > 0.0) || !(f2v > 0.0)) {
    throw DegenerateError("sparse-limit coherence needs positive marginals");
  }
  return (f12v - f1v * f2v) / std::sqrt(f1v * f2v);
}

double block_coherence(double theta1, double theta2, double varrho) {
  if (is_degenerate(theta1) || is_degenerate(theta2)) return 0.0;
  return (varrho - theta1 * theta2) /
         std::sqrt(theta1 * theta2 * (1.0 - theta1) * (1.0 - theta2));
}

namespace {

struct PointEvaluation {
  BivariateEdgeSpec spec;
  double lo = 0.0, hi = 0.0;
  std::optional<std::string> problem;
  BoundSide side = BoundSide::upper;
  double bound = 0.0;
};

PointEvaluation evaluate_point(const GraphonPairModel& model, double x,
                               double y) {
  PointEvaluation ev;
  const double rho = model.rho();
  const double p1 = rho * model.f1()(x, y);
  const double p2 = rho * model.f2()(x, y);
  ev.spec.p1 = p1;
  ev.spec.p2 = p2;
  for (double p : {p1, p2}) {
    if (!(p >= 0.0 && p <= 1.0 + kBoundTolerance)) {
      std::ostringstream os;
      os << "edge probability " << p << " outside [0, 1]";
      ev.problem = os.str();
      return ev;
    }
  }
  ev.spec.p1 = std::min(p1, 1.0);
  ev.spec.p2 = std::min(p2, 1.0);
  const bool degenerate = is_degenerate(ev.spec.p1) || is_degenerate(ev.spec.p2);

  if (model.cross_kind() == CrossKind::moment) {
    const double f12v = model.cross()(x, y);
    const double p11 = std::pow(rho, model.gamma()) * f12v;
    if (degenerate) {
      if (std::abs(p11 - ev.spec.p1 * ev.spec.p2) > kBoundTolerance) {
        std::ostringstream os;
        os << "joint probability " << p11
           << " inconsistent with degenerate marginals (" << ev.spec.p1 << ", "
           << ev.spec.p2 << ")";
        ev.problem = os.str();
        ev.side = p11 > ev.spec.p1 * ev.spec.p2 ? BoundSide::upper
                                                : BoundSide::lower;
        ev.bound = 0.0;
      }
      return ev;
    }
    if (model.gamma() == 2) {
      ev.spec.r =
          conditional_correlation(rho, model.f1()(x, y), model.f2()(x, y), f12v);
    } else {
      ev.spec.r = (p11 - p1 * p2) / std::sqrt(p1 * (1 - p1) * p2 * (1 - p2));
    }
  } else {
    if (degenerate) return ev;  // r = 0 by convention
    ev.spec.r = std::pow(rho, model.gamma() - 1) * model.cross()(x, y);
  }

  const auto [lo, hi] = corr_bounds(ev.spec.p1, ev.spec.p2);
  ev.lo = lo;
  ev.hi = hi;
  std::ostringstream os;
  os.precision(10);
  if (ev.spec.r < lo - kClampTolerance) {
    os << "correlation " << ev.spec.r << " below lower bound " << lo;
    ev.problem = os.str();
    ev.side = BoundSide::lower;
    ev.bound = lo;
  } else if (ev.spec.r > hi + kClampTolerance) {
    os << "correlation " << ev.spec.r << " above upper bound " << hi;
    ev.problem = os.str();
    ev.side = BoundSide::upper;
    ev.bound = hi;
  }
  return ev;
}

}  // namespace

BivariateEdgeSpec edge_probs_at(const GraphonPairModel& model, double x,
                                double y) {
  const PointEvaluation ev = evaluate_point(model, x, y);
  if (ev.problem) {
    std::ostringstream os;
    os << "inadmissible at (x, y) = (" << x << ", " << y << "): "
       << *ev.problem;
    throw AdmissibilityError(os.str(), ev.side, ev.bound);
  }
  return ev.spec;
}

// ---------------------------------------------------------------------------
// Blockmodel conversion

std::vector<std::size_t> BlockCoherenceSpec::resolved_block_sizes() const {
  if (!block_sizes.empty()) {
    if (block_sizes.size() != blocks()) {
      throw ConfigError("block_sizes has " +
                        std::to_string(block_sizes.size()) + " entries for " +
                        std::to_string(blocks()) + " blocks");
    }
    return block_sizes;
  }
  std::vector<std::size_t> h(blocks(), 0);
  for (int z : labels) {
    if (z < 0 || static_cast<std::size_t>(z) >= blocks()) {
      throw ConfigError("label " + std::to_string(z + 1) + " outside 1.." +
                        std::to_string(blocks()));
    }
    ++h[static_cast<std::size_t>(z)];
  }
  return h;
}

BlockGraphons blockmodel_to_graphons(const BlockCoherenceSpec& spec) {
  const std::size_t k = spec.blocks();
  if (k == 0) throw ConfigError("blockmodel needs at least one block");
  if (spec.theta2.size() != k || spec.varrho.size() != k) {
    throw ConfigError("theta1, theta2 and varrho must all be K x K");
  }
  for (const auto* m : {&spec.theta1, &spec.theta2, &spec.varrho}) {
    if (!m->is_symmetric()) {
      throw ConfigError("block parameter matrices must be symmetric");
    }
  }
  BlockMatrix coherence(k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double t1 = spec.theta1(a, b);
      const double t2 = spec.theta2(a, b);
      const double v = spec.varrho(a, b);
      std::ostringstream os;
      os << "block pair " << block_pair(a, b) << ": ";
      if (!(t1 >= 0.0 && t1 <= 1.0) || !(t2 >= 0.0 && t2 <= 1.0)) {
        os << "edge probabilities (" << t1 << ", " << t2
           << ") must lie in [0, 1]";
        throw ConfigError(os.str());
      }
      if (!(v >= 0.0)) {
        os << "joint moment varrho = " << v << " must be nonnegative";
        throw AdmissibilityError(os.str(), BoundSide::lower, 0.0);
      }
      const double ceiling = std::min(t1, t2);
      const double floor = std::max(0.0, t1 + t2 - 1.0);
      if (v > ceiling + kBoundTolerance) {
        os << "joint moment varrho = " << v << " exceeds min(theta1, theta2) = "
           << ceiling;
        throw AdmissibilityError(os.str(), BoundSide::upper, ceiling);
      }
      if (v < floor - kBoundTolerance) {
        os << "joint moment varrho = " << v
           << " below max(0, theta1 + theta2 - 1) = " << floor;
        throw AdmissibilityError(os.str(), BoundSide::lower, floor);
      }
      coherence(a, b) = block_coherence(t1, t2, v);
    }
  }
  const auto sizes = spec.resolved_block_sizes();
  const BlockPartition part = BlockPartition::from_sizes(sizes);
  auto f1 = SymmetricFunction::step(StepFunction(part, spec.theta1));
  auto f2 = SymmetricFunction::step(StepFunction(part, spec.theta2));
  auto f12 = SymmetricFunction::step(StepFunction(part, spec.varrho));
  return {GraphonPairModel::with_cross_moment(std::move(f1), std::move(f2),
                                              std::move(f12), 1.0, 2),
          SymmetricFunction::step(StepFunction(part, std::move(coherence)))};
}

// ---------------------------------------------------------------------------
// Admissibility and normalization

namespace {

// Union of the boundaries of all step functions, or nullopt when any
// function is a black-box evaluator.
std::optional<std::vector<double>> union_boundaries(
    const GraphonPairModel& model) {
  std::set<double> cuts;
  for (const auto* f : {&model.f1(), &model.f2(), &model.cross()}) {
    const StepFunction* s = f->as_step();
    if (!s) return std::nullopt;
    for (double b : s->partition().boundaries()) cuts.insert(b);
  }
  return std::vector<double>(cuts.begin(), cuts.end());
}

}  // namespace

AdmissibilityReport admissibility_report(const GraphonPairModel& model,
                                         std::size_t grid_resolution) {
  if (grid_resolution < 2) {
    throw ConfigError("grid resolution must be at least 2");
  }
  AdmissibilityReport report;
  std::vector<double> points;
  std::optional<BlockPartition> cells;
  if (auto cuts = union_boundaries(model)) {
    cells = BlockPartition(std::move(*cuts));
    for (std::size_t a = 0; a < cells->blocks(); ++a) {
      points.push_back(cells->midpoint(a));
    }
    report.exact = true;
  } else {
    for (std::size_t i = 0; i < grid_resolution; ++i) {
      points.push_back((i + 0.5) / static_cast<double>(grid_resolution));
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i; j < points.size(); ++j) {
      ++report.points_checked;
      const PointEvaluation ev = evaluate_point(model, points[i], points[j]);
      if (!ev.problem) continue;
      Violation v;
      v.x = points[i];
      v.y = points[j];
      if (cells) {
        v.block_a = i;
        v.block_b = j;
      }
      v.p1 = ev.spec.p1;
      v.p2 = ev.spec.p2;
      v.r = ev.spec.r;
      v.lo = ev.lo;
      v.hi = ev.hi;
      v.reason = *ev.problem;
      report.violations.push_back(std::move(v));
    }
  }
  return report;
}

GraphonPairModel normalize_l1(const GraphonPairModel& model) {
  const double n1 = model.f1().l1_norm();
  const double n2 = model.f2().l1_norm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) {
    throw DegenerateError("cannot normalize a graph limit with zero L1 norm");
  }
  // One common scale: the layer-averaged norm becomes 1.
  const double c = 0.5 * (n1 + n2);
  const double rho = model.rho() * c;
  SymmetricFunction cross =
      model.cross_kind() == CrossKind::moment
          ? model.cross().scaled(1.0 / std::pow(c, model.gamma()))
          : model.cross().scaled(1.0 / std::pow(c, model.gamma() - 1));
  if (c == 1.0) {
    return GraphonPairModel(model.f1(), model.f2(), model.cross_kind(),
                            model.cross(), model.rho(), model.gamma(), true);
  }
  return GraphonPairModel(model.f1().scaled(1.0 / c), model.f2().scaled(1.0 / c),
                          model.cross_kind(), std::move(cross), rho,
                          model.gamma(), true);
}

}  // namespace multicoh
