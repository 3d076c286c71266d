#include "multicoh/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "multicoh/errors.hpp"

namespace multicoh {

namespace {

constexpr double kMarginTolerance = 1e-12;
constexpr std::uint32_t kSharedThinningLayer = 0xFFFFu;

std::string node_pair(std::size_t i, std::size_t j) {
  return "node pair (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
         ")";
}

// Visits every pair i < j, computing the per-edge law from positions.
// With a block partition the law is computed once per block pair.
template <class Law, class Compute, class Draw>
void for_each_pair(const std::vector<double>& pos,
                   const std::optional<BlockPartition>& partition,
                   Compute&& compute, Draw&& draw) {
  const std::size_t n = pos.size();
  if (partition) {
    const std::size_t k = partition->blocks();
    std::vector<std::size_t> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = partition->block_of(pos[i]);
    std::vector<std::optional<Law>> cache(k * k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        auto& slot = cache[block[i] * k + block[j]];
        if (!slot) slot.emplace(compute(i, j, pos[i], pos[j]));
        draw(i, j, *slot);
      }
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      draw(i, j, compute(i, j, pos[i], pos[j]));
    }
  }
}

MultiplexSample empty_pair(const Latents& latents) {
  MultiplexSample s;
  s.latents = latents;
  s.layers.assign(2, Adjacency(latents.size()));
  return s;
}

std::size_t draw_category(std::span<const double> pi, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] <= 0.0) continue;
    acc += pi[a];
    last = a;
    if (u < acc) return a;
  }
  return last;
}

void check_weights(std::span<const double> w, bool allow_zero) {
  if (w.empty()) throw ConfigError("block weights must be nonempty");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || (!allow_zero && x == 0.0)) {
      throw ConfigError("block weights must be nonnegative");
    }
    total += x;
  }
  if (!(total > 0.0)) throw ConfigError("block weights sum to zero");
}

}  // namespace

// ---------------------------------------------------------------------------
// Latents

std::vector<std::size_t> apportion(std::span<const double> weights,
                                   std::size_t n) {
  check_weights(weights, true);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> sizes(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t a = 0; a < weights.size(); ++a) {
    const double quota = weights[a] / total * static_cast<double>(n);
    sizes[a] = static_cast<std::size_t>(std::floor(quota));
    assigned += sizes[a];
    remainders.emplace_back(quota - std::floor(quota), a);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& l, const auto& r) { return l.first > r.first; });
  for (std::size_t t = 0; assigned < n; ++t, ++assigned) {
    ++sizes[remainders[t % remainders.size()].second];
  }
  return sizes;
}

Latents sample_latents(std::size_t n, const LatentLaw& law,
                       std::uint64_t seed) {
  switch (law.kind) {
    case LatentLaw::Kind::uniform: {
      std::vector<double> xi(n);
      for (std::size_t i = 0; i < n; ++i) {
        RandomStream s(seed, StreamTag::latents, static_cast<std::uint32_t>(i));
        xi[i] = s.uniform();
      }
      return Latents::positions(std::move(xi));
    }
    case LatentLaw::Kind::multinomial: {
      check_weights(law.weights, true);
      const double total =
          std::accumulate(law.weights.begin(), law.weights.end(), 0.0);
      if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "multinomial probabilities sum to " << total << ", expected 1";
        throw ConfigError(os.str());
      }
      std::vector<int> z(n);
      for (std::size_t i = 0; i < n; ++i) {
        RandomStream s(seed, StreamTag::latents, static_cast<std::uint32_t>(i));
        z[i] = static_cast<int>(draw_category(law.weights, s.uniform()));
      }
      return Latents::labels(std::move(z), law.weights.size());
    }
    case LatentLaw::Kind::contiguous: {
      const auto sizes = apportion(law.weights, n);
      std::vector<int> z;
      z.reserve(n);
      for (std::size_t a = 0; a < sizes.size(); ++a) {
        z.insert(z.end(), sizes[a], static_cast<int>(a));
      }
      return Latents::labels(std::move(z), sizes.size());
    }
  }
  throw ConfigError("unknown latent law");
}

std::vector<double> node_positions(
    const Latents& latents, const std::optional<BlockPartition>& partition) {
  if (!latents.has_labels()) return latents.xi();
  if (!partition) {
    throw ConfigError(
        "block labels need a model whose functions share one block partition");
  }
  if (partition->blocks() != latents.blocks()) {
    throw ConfigError("labels use " + std::to_string(latents.blocks()) +
                      " blocks but the model has " +
                      std::to_string(partition->blocks()));
  }
  std::vector<double> pos;
  pos.reserve(latents.size());
  for (int a : latents.z()) {
    pos.push_back(partition->midpoint(static_cast<std::size_t>(a)));
  }
  return pos;
}

// ---------------------------------------------------------------------------
// Mixture construction

VmeanFunction target_correlation_vmean(const GraphonPairModel& model) {
  return [model](double x, double y) {
    const double r = edge_probs_at(model, x, y).r;
    if (r < 0.0) {
      std::ostringstream os;
      os << "mixture sampler needs nonnegative correlation, got " << r
         << " at (" << x << ", " << y << ")";
      throw ModelError(os.str());
    }
    return std::sqrt(r);
  };
}

VmeanFunction scaled_coherence_vmean(const GraphonPairModel& model) {
  return [model](double x, double y) {
    const double r0 =
        edge_coherence(edge_probs_at(model, x, y).r, model.rho(), model.gamma());
    if (r0 < 0.0) {
      std::ostringstream os;
      os << "mixture sampler needs nonnegative coherence, got " << r0
         << " at (" << x << ", " << y << ")";
      throw ModelError(os.str());
    }
    return model.rho() * std::sqrt(r0);
  };
}

MultiplexSample sample_mixture_pair(const GraphonPairModel& model,
                                    const Latents& latents,
                                    const VmeanFunction& vmean,
                                    std::uint64_t seed) {
  struct Law {
    double theta;
    double vmean;
  };
  const auto partition = model.shared_partition();
  const auto pos = node_positions(latents, partition);
  MultiplexSample out = empty_pair(latents);
  auto compute = [&](std::size_t i, std::size_t j, double x, double y) {
    const double p1 = model.rho() * model.f1()(x, y);
    const double p2 = model.rho() * model.f2()(x, y);
    if (std::abs(p1 - p2) > kMarginTolerance) {
      std::ostringstream os;
      os << "mixture sampler needs equal marginals; " << node_pair(i, j)
         << " has (" << p1 << ", " << p2 << ")";
      throw ModelError(os.str());
    }
    const double v = vmean(x, y);
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << "mixture sampler needs a nonnegative V mean, got " << v << " at "
         << node_pair(i, j);
      throw ModelError(os.str());
    }
    if (v > 1.0) {
      std::ostringstream os;
      os << "V mean " << v << " exceeds 1 at " << node_pair(i, j);
      throw ModelError(os.str());
    }
    return Law{p1, v};
  };
  auto draw = [&](std::size_t i, std::size_t j, const Law& law) {
    RandomStream s(seed, StreamTag::mixture, static_cast<std::uint32_t>(i),
                   static_cast<std::uint32_t>(j));
    const bool u1 = s.bernoulli(law.theta);
    const bool u2 = s.bernoulli(law.theta);
    const bool w = s.bernoulli(law.theta);
    const bool v1 = s.bernoulli(law.vmean);
    const bool v2 = s.bernoulli(law.vmean);
    if (v1 ? w : u1) out.layers[0].set(i, j);
    if (v2 ? w : u2) out.layers[1].set(i, j);
  };
  for_each_pair<Law>(pos, partition, compute, draw);
  return out;
}

// ---------------------------------------------------------------------------
// Joint-table construction

MultiplexSample sample_joint_table_pair(const GraphonPairModel& model,
                                        const Latents& latents,
                                        std::uint64_t seed) {
  const auto partition = model.shared_partition();
  const auto pos = node_positions(latents, partition);
  MultiplexSample out = empty_pair(latents);
  auto compute = [&](std::size_t i, std::size_t j, double x, double y) {
    try {
      return from_spec(edge_probs_at(model, x, y));
    } catch (const AdmissibilityError& e) {
      throw AdmissibilityError(node_pair(i, j) + ": " + e.what(), e.side(),
                               e.bound());
    }
  };
  auto draw = [&](std::size_t i, std::size_t j,
                  const JointEdgeDistribution& dist) {
    RandomStream s(seed, StreamTag::joint_table, static_cast<std::uint32_t>(i),
                   static_cast<std::uint32_t>(j));
    const Outcome a = sample_edge(dist, s);
    if (a & 1u) out.layers[0].set(i, j);
    if (a & 2u) out.layers[1].set(i, j);
  };
  for_each_pair<JointEdgeDistribution>(pos, partition, compute, draw);
  return out;
}

// ---------------------------------------------------------------------------
// Modulation

void ModulationSpec::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw ConfigError("sparsity scale rho must lie in (0, 1]");
  }
  if (f1.inf() < 0.0) throw ConfigError("f1 must be nonnegative");
  if (rho * f1.sup() > 1.0 + kMarginTolerance) {
    throw ConfigError("rho * sup f1 exceeds 1");
  }
  if (h.inf() < 0.0 || h.sup() > 1.0) {
    throw ConfigError("modulation function h must take values in [0, 1]");
  }
}

std::optional<BlockPartition> ModulationSpec::shared_partition() const {
  const StepFunction* s1 = f1.as_step();
  const StepFunction* sh = h.as_step();
  if (s1 && sh && s1->partition() == sh->partition()) return s1->partition();
  return std::nullopt;
}

JointEdgeDistribution modulation_outcomes(const ModulationSpec& spec, double x,
                                          double y) {
  const double p1 = std::min(1.0, spec.rho * spec.f1(x, y));
  const double hv = spec.h(x, y);
  const double p11 = p1 * hv;
  return JointEdgeDistribution::bivariate(1.0 - p1, 0.0, p1 * (1.0 - hv), p11);
}

double modulation_correlation(const ModulationSpec& spec, double x, double y) {
  const double p1 = spec.rho * spec.f1(x, y);
  const double hv = spec.h(x, y);
  if (is_degenerate(p1) || is_degenerate(p1 * hv)) return 0.0;
  return std::sqrt(hv * (1.0 - p1) / (1.0 - p1 * hv));
}

MultiplexSample sample_modulation_pair(const ModulationSpec& spec,
                                       const Latents& latents,
                                       std::uint64_t seed) {
  spec.validate();
  struct Law {
    double p1;
    double h;
  };
  const auto partition = spec.shared_partition();
  const auto pos = node_positions(latents, partition);
  MultiplexSample out = empty_pair(latents);
  auto compute = [&](std::size_t, std::size_t, double x, double y) {
    return Law{std::min(1.0, spec.rho * spec.f1(x, y)), spec.h(x, y)};
  };
  auto draw = [&](std::size_t i, std::size_t j, const Law& law) {
    RandomStream s(seed, StreamTag::modulation, static_cast<std::uint32_t>(i),
                   static_cast<std::uint32_t>(j));
    const bool a1 = s.bernoulli(law.p1);
    const bool a2 = s.bernoulli(law.h);
    if (a1) {
      out.layers[0].set(i, j);
      if (a2) out.layers[1].set(i, j);
    }
  };
  for_each_pair<Law>(pos, partition, compute, draw);
  return out;
}

// ---------------------------------------------------------------------------
// Thinning

MultiplexSample thin(const MultiplexSample& sample, double keep,
                     ThinningMode mode, std::uint64_t seed) {
  if (!(keep >= 0.0 && keep <= 1.0)) {
    throw ConfigError("thinning keep probability must lie in [0, 1]");
  }
  MultiplexSample out;
  out.latents = sample.latents;
  out.layers.assign(sample.layer_count(), Adjacency(sample.nodes()));
  for (std::size_t l = 0; l < sample.layer_count(); ++l) {
    const std::uint32_t stream_layer =
        mode == ThinningMode::shared ? kSharedThinningLayer
                                     : static_cast<std::uint32_t>(l);
    for (const auto& [i, j] : sample.layers[l].edges()) {
      RandomStream s(seed, StreamTag::thinning, static_cast<std::uint32_t>(i),
                     static_cast<std::uint32_t>(j), stream_layer);
      if (s.bernoulli(keep)) out.layers[l].set(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Negative correlation through the latent process

GraphonPairModel build_negative_pair_model(const SymmetricFunction& g,
                                           double c, double rho) {
  if (!(c >= 0.0)) throw ConfigError("c must be nonnegative");
  if (g.inf() < 0.0) throw ConfigError("g must be nonnegative");
  if (c * g.sup() > 1.0 + kMarginTolerance) {
    std::ostringstream os;
    os << "c * sup g = " << c * g.sup() << " exceeds 1";
    throw ConfigError(os.str());
  }
  SymmetricFunction f2 = [&] {
    if (const StepFunction* s = g.as_step()) {
      BlockMatrix v = s->values();
      for (std::size_t a = 0; a < v.size(); ++a) {
        for (std::size_t b = 0; b < v.size(); ++b) v(a, b) = 1.0 - c * v(a, b);
      }
      return SymmetricFunction::step(StepFunction(s->partition(), std::move(v)));
    }
    return SymmetricFunction::evaluator(
        "one_minus_c_" + g.name(),
        [g, c](double x, double y) { return 1.0 - c * g(x, y); },
        1.0 - c * g.inf(), 1.0 - c * g.sup());
  }();
  SymmetricFunction zero = [&] {
    if (const StepFunction* s = g.as_step()) {
      return SymmetricFunction::step(
          StepFunction(s->partition(), BlockMatrix(s->partition().blocks())));
    }
    return SymmetricFunction::constant(0.0);
  }();
  return GraphonPairModel::with_coherence(g, std::move(f2), std::move(zero),
                                          rho, 2);
}

// ---------------------------------------------------------------------------
// Generation entry point

MultiplexSample generate(const SamplerConfig& config) {
  auto pair_sample = [&](const GraphonPairModel& model, const Latents& latents) {
    switch (config.mechanism) {
      case Mechanism::joint_table:
        return sample_joint_table_pair(model, latents, config.seed);
      case Mechanism::mixture: {
        const VmeanFunction vm =
            config.vmean == VmeanConvention::target_correlation
                ? target_correlation_vmean(model)
                : scaled_coherence_vmean(model);
        return sample_mixture_pair(model, latents, vm, config.seed);
      }
      case Mechanism::modulation:
        break;
    }
    throw ConfigError("modulation mechanism needs a modulation model");
  };

  if (const auto* m = std::get_if<GraphonPairModel>(&config.model)) {
    return pair_sample(*m, sample_latents(config.n, config.latents, config.seed));
  }
  if (const auto* b = std::get_if<BlockCoherenceSpec>(&config.model)) {
    const BlockGraphons g = blockmodel_to_graphons(*b);
    const Latents latents =
        b->labels.empty()
            ? sample_latents(config.n, config.latents, config.seed)
            : Latents::labels(b->labels, b->blocks());
    return pair_sample(g.model, latents);
  }
  const auto& spec = std::get<ModulationSpec>(config.model);
  if (config.mechanism != Mechanism::modulation) {
    throw ConfigError("a modulation model can only use the modulation mechanism");
  }
  return sample_modulation_pair(
      spec, sample_latents(config.n, config.latents, config.seed), config.seed);
}

// ---------------------------------------------------------------------------
// Covariance decomposition

CovarianceDecomposition covariance_decomposition(const GraphonPairModel& model,
                                                 EdgeRef first, EdgeRef second,
                                                 std::size_t n_mc,
                                                 std::uint64_t seed) {
  for (const EdgeRef& e : {first, second}) {
    if (e.i == e.j) throw ConfigError("edge endpoints must differ");
    if (e.layer != 0 && e.layer != 1) throw ConfigError("layer must be 0 or 1");
  }
  if (n_mc == 0) throw ConfigError("n_mc must be positive");
  std::vector<std::size_t> nodes{first.i, first.j, second.i, second.j};
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto slot = [&](std::size_t v) {
    return static_cast<std::size_t>(
        std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin());
  };
  const bool same_pair =
      std::minmax(first.i, first.j) == std::minmax(second.i, second.j);

  double s_mu1 = 0, s_mu2 = 0, s_mu12 = 0, s_cond = 0;
  double s_a = 0, s_b = 0, s_ab = 0;
  std::vector<double> xi(nodes.size());
  for (std::size_t t = 0; t < n_mc; ++t) {
    RandomStream s(seed, StreamTag::monte_carlo, static_cast<std::uint32_t>(t),
                   static_cast<std::uint32_t>(t >> 32));
    for (double& x : xi) x = s.uniform();
    const auto dist1 =
        from_spec(edge_probs_at(model, xi[slot(first.i)], xi[slot(first.j)]));
    const auto spec1 = to_spec(dist1);
    const double mu1 = first.layer == 0 ? spec1.p1 : spec1.p2;
    double mu2, cond;
    bool a, b;
    const Outcome o1 = sample_edge(dist1, s);
    a = (o1 >> first.layer) & 1u;
    if (same_pair) {
      mu2 = second.layer == 0 ? spec1.p1 : spec1.p2;
      cond = first.layer == second.layer ? mu1 * (1.0 - mu1)
                                         : dist1.p(1, 1) - spec1.p1 * spec1.p2;
      b = (o1 >> second.layer) & 1u;
    } else {
      const auto dist2 = from_spec(
          edge_probs_at(model, xi[slot(second.i)], xi[slot(second.j)]));
      const auto spec2 = to_spec(dist2);
      mu2 = second.layer == 0 ? spec2.p1 : spec2.p2;
      cond = 0.0;
      b = (sample_edge(dist2, s) >> second.layer) & 1u;
    }
    s_mu1 += mu1;
    s_mu2 += mu2;
    s_mu12 += mu1 * mu2;
    s_cond += cond;
    s_a += a;
    s_b += b;
    s_ab += (a && b);
  }
  const double n = static_cast<double>(n_mc);
  CovarianceDecomposition out;
  out.latent_term = s_mu12 / n - (s_mu1 / n) * (s_mu2 / n);
  out.conditional_term = s_cond / n;
  out.total = out.latent_term + out.conditional_term;
  out.sampled = s_ab / n - (s_a / n) * (s_b / n);
  return out;
}

double unconditional_edge_correlation(const GraphonPairModel& model,
                                      std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw ConfigError("n_mc must be at least 2");
  double s_a = 0, s_b = 0, s_ab = 0;
  for (std::size_t t = 0; t < n_mc; ++t) {
    RandomStream s(seed, StreamTag::monte_carlo, static_cast<std::uint32_t>(t),
                   static_cast<std::uint32_t>(t >> 32));
    const double x = s.uniform();
    const double y = s.uniform();
    const Outcome o = sample_edge(from_spec(edge_probs_at(model, x, y)), s);
    const bool a = o & 1u;
    const bool b = o & 2u;
    s_a += a;
    s_b += b;
    s_ab += (a && b);
  }
  const double n = static_cast<double>(n_mc);
  const double ma = s_a / n, mb = s_b / n;
  const double va = ma * (1 - ma), vb = mb * (1 - mb);
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return (s_ab / n - ma * mb) / std::sqrt(va * vb);
}

}  // namespace multicoh
