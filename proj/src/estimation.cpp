#include "multicoh/estimation.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "multicoh/bernoulli.hpp"
#include "multicoh/errors.hpp"
#include "multicoh/graphon.hpp"

namespace multicoh {

namespace {

void check_same_size(const Adjacency& a1, const Adjacency& a2) {
  if (a1.nodes() != a2.nodes()) {
    throw ModelError("adjacency size mismatch: " + std::to_string(a1.nodes()) +
                     " vs " + std::to_string(a2.nodes()));
  }
}

std::string format_value(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, *v);
  return std::string(buf, res.ptr);
}

double resolve_rho(const Adjacency& a1, const Adjacency& a2,
                   const EstimationOptions& options) {
  if (options.rho) return *options.rho;
  if (options.density == DensityScope::per_layer) {
    return std::sqrt(a1.density() * a2.density());
  }
  return 0.5 * (a1.density() + a2.density());
}

}  // namespace

HadamardMoment hadamard_moment(const Adjacency& a1, const Adjacency& a2) {
  check_same_size(a1, a2);
  HadamardMoment out{Adjacency(a1.nodes()), 0.0};
  for (const auto& [i, j] : a1.edges()) {
    if (a2(i, j)) out.product.set(i, j);
  }
  out.mean = out.product.density();
  return out;
}

double density_hat(const MultiplexSample& sample) {
  if (sample.layers.empty()) return 0.0;
  double s = 0.0;
  for (const auto& layer : sample.layers) s += layer.density();
  return s / static_cast<double>(sample.layer_count());
}

std::vector<double> density_per_layer(const MultiplexSample& sample) {
  std::vector<double> out;
  for (const auto& layer : sample.layers) out.push_back(layer.density());
  return out;
}

CoherenceEstimate block_estimates(const Adjacency& a1, const Adjacency& a2,
                                  const std::vector<int>& labels,
                                  std::size_t blocks,
                                  const EstimationOptions& options) {
  check_same_size(a1, a2);
  const std::size_t n = a1.nodes();
  if (labels.size() != n) {
    throw ModelError("label vector has " + std::to_string(labels.size()) +
                     " entries for " + std::to_string(n) + " nodes");
  }
  for (int z : labels) {
    if (z < 0 || static_cast<std::size_t>(z) >= blocks) {
      throw ModelError("label " + std::to_string(z + 1) + " outside 1.." +
                       std::to_string(blocks));
    }
  }
  if (options.gamma != 1 && options.gamma != 2) {
    throw ConfigError("gamma must be 1 or 2");
  }

  CoherenceEstimate est;
  est.blocks = blocks;
  est.gamma = options.gamma;
  est.cells.assign(blocks * blocks, BlockCounts{});
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = static_cast<std::size_t>(labels[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto zj = static_cast<std::size_t>(labels[j]);
      const std::size_t a = std::min(zi, zj), b = std::max(zi, zj);
      BlockCounts& c = est.cells[a * blocks + b];
      const bool e1 = a1(i, j), e2 = a2(i, j);
      if (e1 && e2) {
        ++c.n11;
      } else if (e1) {
        ++c.n10;
      } else if (e2) {
        ++c.n01;
      } else {
        ++c.n00;
      }
    }
  }
  for (std::size_t a = 0; a < blocks; ++a) {
    for (std::size_t b = a + 1; b < blocks; ++b) {
      est.cells[b * blocks + a] = est.cells[a * blocks + b];
    }
  }

  est.rho_hat = resolve_rho(a1, a2, options);
  est.theta1_hat = est.theta2_hat = est.varrho_hat = est.r_hat = est.r0_hat =
      EstimateMatrix(blocks);
  for (std::size_t a = 0; a < blocks; ++a) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const BlockCounts& c = est.cells[a * blocks + b];
      const std::size_t total = c.total();
      if (total == 0) continue;
      const double nt = static_cast<double>(total);
      const double t1 = static_cast<double>(c.n10 + c.n11) / nt;
      const double t2 = static_cast<double>(c.n01 + c.n11) / nt;
      est.theta1_hat(a, b) = t1;
      est.theta2_hat(a, b) = t2;
      est.varrho_hat(a, b) = static_cast<double>(c.n11) / nt;
      if (is_degenerate(t1) || is_degenerate(t2)) continue;
      const auto table = JointEdgeDistribution::bivariate(
          static_cast<double>(c.n00) / nt, static_cast<double>(c.n01) / nt,
          static_cast<double>(c.n10) / nt, static_cast<double>(c.n11) / nt);
      const double r = to_spec(table).r;
      est.r_hat(a, b) = r;
      if (est.rho_hat > 0.0 && est.rho_hat <= 1.0) {
        est.r0_hat(a, b) = edge_coherence(r, est.rho_hat, options.gamma);
      }
    }
  }
  return est;
}

std::map<LayerPair, CoherenceEstimate> pairwise_coherence_summary(
    const MultiplexSample& sample, const std::vector<int>& labels,
    std::size_t blocks, const EstimationOptions& options) {
  const std::size_t d = sample.layer_count();
  if (d < 2) {
    throw ModelError("pairwise summary needs at least 2 layers, got " +
                     std::to_string(d));
  }
  EstimationOptions opts = options;
  if (!opts.rho && opts.density == DensityScope::cross_layer) {
    opts.rho = density_hat(sample);
  }
  std::map<LayerPair, CoherenceEstimate> out;
  for (std::size_t m1 = 0; m1 < d; ++m1) {
    for (std::size_t m2 = m1 + 1; m2 < d; ++m2) {
      out.emplace(LayerPair{m1, m2},
                  block_estimates(sample.layers[m1], sample.layers[m2], labels,
                                  blocks, opts));
    }
  }
  return out;
}

void write_estimate_rows(std::ostream& out, const CoherenceEstimate& est,
                         const std::string& prefix) {
  for (std::size_t a = 0; a < est.blocks; ++a) {
    for (std::size_t b = a; b < est.blocks; ++b) {
      out << prefix << a + 1 << ',' << b + 1 << ',' << est.count(a, b) << ','
          << format_value(est.theta1_hat(a, b)) << ','
          << format_value(est.theta2_hat(a, b)) << ','
          << format_value(est.varrho_hat(a, b)) << ','
          << format_value(est.r_hat(a, b)) << ','
          << format_value(est.r0_hat(a, b)) << '\n';
    }
  }
}

void write_estimate_csv(std::ostream& out, const CoherenceEstimate& est) {
  out << kEstimateCsvHeader << '\n';
  write_estimate_rows(out, est);
}

void write_coherence_graph(std::ostream& out, const CoherenceEstimate& est) {
  out << "# multicoh coherence v1 K=" << est.blocks << '\n';
  for (std::size_t a = 0; a < est.blocks; ++a) {
    for (std::size_t b = a; b < est.blocks; ++b) {
      if (!est.r0_hat(a, b)) continue;
      out << a + 1 << '\t' << b + 1 << '\t' << format_value(est.r0_hat(a, b))
          << '\n';
    }
  }
}

}  // namespace multicoh
