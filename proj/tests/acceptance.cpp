// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "multicoh/bernoulli.hpp"
#include "multicoh/cli.hpp"
#include "multicoh/errors.hpp"
#include "multicoh/estimation.hpp"
#include "multicoh/graphon.hpp"
#include "multicoh/io.hpp"
#include "multicoh/samplers.hpp"

using namespace multicoh;
namespace fs = std::filesystem;

namespace {

struct Outcome4 {
  std::array<double, 4> freq{};  // indexed by outcome mask
  double p1() const { return freq[1] + freq[3]; }
  double p2() const { return freq[2] + freq[3]; }
  double corr() const {
    const double a = p1(), b = p2();
    return (freq[3] - a * b) / std::sqrt(a * (1 - a) * b * (1 - b));
  }
};

Outcome4 outcome_frequencies(const MultiplexSample& s) {
  std::array<std::size_t, 4> c{};
  const auto& a = s.layers[0];
  const auto& b = s.layers[1];
  for (std::size_t i = 0; i < s.nodes(); ++i)
    for (std::size_t j = i + 1; j < s.nodes(); ++j)
      ++c[(a(i, j) ? 1u : 0u) | (b(i, j) ? 2u : 0u)];
  Outcome4 o;
  const double pairs = static_cast<double>(a.pairs());
  for (int k = 0; k < 4; ++k) o.freq[k] = static_cast<double>(c[k]) / pairs;
  return o;
}

std::vector<int> equal_blocks(std::size_t n, std::size_t k) {
  std::vector<int> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<int>(i * k / n);
  return z;
}

SymmetricFunction constant(double c) { return SymmetricFunction::constant(c); }

SymmetricFunction two_block(double in, double out) {
  return SymmetricFunction::step(StepFunction(
      BlockPartition({0.0, 0.5, 1.0}), BlockMatrix{{in, out}, {out, in}}));
}

Latents two_block_labels(std::size_t n) {
  return Latents::labels(equal_blocks(n, 2), 2);
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

// 1 --------------------------------------------------------------------------
Verdict moment_algebra() {
  std::mt19937_64 gen(20240601);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_table = 0.0, worst_spec = 0.0;
  for (int d = 1; d <= 4; ++d) {
    for (int rep = 0; rep < 1000; ++rep) {
      std::vector<double> p(std::size_t{1} << d);
      double total = 0.0;
      for (double& v : p) total += (v = e(gen));
      for (double& v : p) v /= total;
      const JointEdgeDistribution t(d, p);
      const auto back = moments_to_probs(probs_to_moments(t));
      for (std::size_t a = 0; a < p.size(); ++a) {
        worst_table = std::max(
            worst_table, std::abs(back[static_cast<Outcome>(a)] - t[static_cast<Outcome>(a)]));
      }
    }
  }
  for (int rep = 0; rep < 1000; ++rep) {
    double p1 = u(gen), p2 = u(gen);
    while (is_degenerate(p1)) p1 = u(gen);
    while (is_degenerate(p2)) p2 = u(gen);
    const auto b = corr_bounds(p1, p2);
    const double r = b.lo + u(gen) * (b.hi - b.lo);
    const auto s = to_spec(from_spec({p1, p2, r}));
    worst_spec = std::max({worst_spec, std::abs(s.p1 - p1),
                           std::abs(s.p2 - p2), std::abs(s.r - r)});
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "max table error %.2e, max spec error %.2e (limit 1e-12)",
                worst_table, worst_spec);
  return {worst_table <= 1e-12 && worst_spec <= 1e-12, buf};
}

// 2 --------------------------------------------------------------------------
Verdict bounds_correctness() {
  int failures = 0, checks = 0;
  for (int i = 1; i <= 50; ++i) {
    for (int j = 1; j <= 50; ++j) {
      const double p1 = i / 51.0, p2 = j / 51.0;
      const auto b = corr_bounds(p1, p2);
      auto nonnegative = [&](double r) {
        try {
          const auto t = from_spec({p1, p2, r});
          for (double v : t.probs())
            if (v < 0.0) return false;
          return true;
        } catch (const AdmissibilityError&) {
          return false;
        }
      };
      checks += 2;
      failures += !nonnegative(b.lo);
      failures += !nonnegative(b.hi);
      if (b.lo - 1e-6 >= -1.0) {
        ++checks;
        failures += nonnegative(b.lo - 1e-6);
      }
      if (b.hi + 1e-6 <= 1.0) {
        ++checks;
        failures += nonnegative(b.hi + 1e-6);
      }
    }
  }
  return {failures == 0, std::to_string(checks) + " checks, " +
                             std::to_string(failures) + " failures"};
}

// 3 --------------------------------------------------------------------------
Verdict mixture_mechanism() {
  const std::size_t n = 1415;  // 1,000,405 node pairs
  const auto model = GraphonPairModel::with_coherence(
      constant(0.5), constant(0.5), constant(0.36), 1.0);
  const auto s = sample_mixture_pair(
      model, sample_latents(n, LatentLaw::uniform(), 31),
      [](double, double) { return 0.6; }, 31);
  const auto o = outcome_frequencies(s);
  char buf[160];
  std::snprintf(buf, sizeof buf, "p1 %.5f, p2 %.5f, corr %.5f (target 0.36)",
                o.p1(), o.p2(), o.corr());
  const bool ok = std::abs(o.p1() - 0.5) <= 0.005 &&
                  std::abs(o.p2() - 0.5) <= 0.005 &&
                  std::abs(o.corr() - 0.36) <= 0.01;
  return {ok, buf};
}

// 4 --------------------------------------------------------------------------
Verdict modulation_model() {
  const std::size_t n = 1415;
  const ModulationSpec spec{constant(0.5), constant(0.8), 0.1};
  const auto s = sample_modulation_pair(
      spec, sample_latents(n, LatentLaw::uniform(), 41), 41);
  std::size_t subset_violations = 0;
  for (const auto& [i, j] : s.layers[1].edges())
    subset_violations += !s.layers[0](i, j);
  const auto o = outcome_frequencies(s);
  const double target_r = std::sqrt(0.8 * 0.95 / 0.96);
  // (P11, P10, P01, P00)
  const std::array<double, 4> got{o.freq[3], o.freq[1], o.freq[2], o.freq[0]};
  const std::array<double, 4> want{0.04, 0.01, 0.0, 0.95};
  bool freq_ok = true;
  for (int k = 0; k < 4; ++k) freq_ok &= std::abs(got[k] - want[k]) <= 0.002;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "subset violations %zu, (P11,P10,P01,P00) = (%.5f, %.5f, "
                "%.5f, %.5f), corr %.5f (target %.5f)",
                subset_violations, got[0], got[1], got[2], got[3], o.corr(),
                target_r);
  return {subset_violations == 0 && freq_ok &&
              std::abs(o.corr() - target_r) <= 0.01,
          buf};
}

// 5 --------------------------------------------------------------------------
Verdict estimator_recovery() {
  const std::size_t n = 1000;
  BlockCoherenceSpec b;
  b.theta1 = {{0.6, 0.2}, {0.2, 0.6}};
  b.theta2 = b.theta1;
  const BlockMatrix target{{0.36, 0.16}, {0.16, 0.36}};
  b.varrho = BlockMatrix(2);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = 0; c < 2; ++c) {
      const double t = b.theta1(a, c);
      b.varrho(a, c) = t * t + target(a, c) * t * (1 - t);
    }
  b.labels = equal_blocks(n, 2);
  SamplerConfig cfg;
  cfg.seed = 51;
  cfg.model = b;
  cfg.mechanism = Mechanism::mixture;
  const auto s = generate(cfg);
  const auto est = block_estimates(s.layers[0], s.layers[1], b.labels, 2);
  double worst = 0.0;
  int defined = 0;
  std::string values;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = a; c < 2; ++c) {
      if (!est.r_hat(a, c)) continue;
      ++defined;
      worst = std::max(worst, std::abs(*est.r_hat(a, c) - target(a, c)));
      char buf[64];
      std::snprintf(buf, sizeof buf, " r(%zu,%zu)=%.4f", a + 1, c + 1,
                    *est.r_hat(a, c));
      values += buf;
    }
  char buf[96];
  std::snprintf(buf, sizeof buf, "; max |r_hat - target| %.4f (limit 0.05)",
                worst);
  return {defined == 3 && worst <= 0.05, values.substr(1) + buf};
}

// 6 --------------------------------------------------------------------------
Verdict scaling_stability() {
  // Unit-L1 marginal so the density estimates rho; r0 = 0.3 everywhere.
  const auto f = two_block(1.2, 0.8);
  const std::size_t n = 2000;
  const std::vector<double> rhos{0.5, 0.2, 0.1};
  std::vector<CoherenceEstimate> ests;
  double min_expected = 1e300;
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    const auto model = GraphonPairModel::with_coherence(
        f, f, two_block(0.3, 0.3), rhos[k], 2);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t c = a; c < 2; ++c) {
        const double x = 0.25 + 0.5 * a, y = 0.25 + 0.5 * c;
        const double p11 = from_spec(edge_probs_at(model, x, y)).p(1, 1);
        const double pairs = a == c ? (n / 2.0) * (n / 2.0 - 1) / 2
                                    : (n / 2.0) * (n / 2.0);
        min_expected = std::min(min_expected, p11 * pairs);
      }
    const auto s = sample_joint_table_pair(model, two_block_labels(n),
                                           610 + k);
    ests.push_back(block_estimates(s.layers[0], s.layers[1],
                                   s.latents.z(), 2, {.gamma = 2}));
  }
  double worst = 0.0;
  bool defined = true;
  std::string values;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = a; c < 2; ++c) {
      char buf[96];
      std::snprintf(buf, sizeof buf, " (%zu,%zu):", a + 1, c + 1);
      values += buf;
      for (std::size_t k = 0; k < ests.size(); ++k) {
        const auto& v = ests[k].r0_hat(a, c);
        defined &= v.has_value();
        if (!v) continue;
        std::snprintf(buf, sizeof buf, " %.3f", *v);
        values += buf;
        for (std::size_t l = 0; l < ests.size(); ++l) {
          const auto& w = ests[l].r0_hat(a, c);
          if (w) worst = std::max(worst, std::abs(*v - *w));
        }
      }
    }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "; min expected concurrent edges %.0f, max pairwise gap %.4f "
                "(limit 0.1)",
                min_expected, worst);
  return {defined && min_expected >= 200 && worst <= 0.1,
          "r0_hat" + values + buf};
}

// 7 --------------------------------------------------------------------------
Verdict blockmodel_exactness() {
  std::mt19937_64 gen(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int specs = 0, mismatches = 0;
  for (std::size_t k = 1; k <= 5; ++k) {
    for (int rep = 0; rep < 200; ++rep) {
      BlockCoherenceSpec s;
      s.theta1 = BlockMatrix(k);
      s.theta2 = BlockMatrix(k);
      s.varrho = BlockMatrix(k);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
          const double t1 = u(gen), t2 = u(gen);
          const double lo = std::max(0.0, t1 + t2 - 1.0);
          const double hi = std::min(t1, t2);
          const double v = lo + u(gen) * (hi - lo);
          s.theta1(a, b) = s.theta1(b, a) = t1;
          s.theta2(a, b) = s.theta2(b, a) = t2;
          s.varrho(a, b) = s.varrho(b, a) = v;
        }
      s.block_sizes.resize(k);
      for (auto& h : s.block_sizes) h = 1 + gen() % 50;
      const auto g = blockmodel_to_graphons(s);
      const auto part = BlockPartition::from_sizes(s.block_sizes);
      ++specs;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
          const double x = part.midpoint(a), y = part.midpoint(b);
          const double t1 = s.theta1(a, b), t2 = s.theta2(a, b);
          const double v = s.varrho(a, b);
          const double coh =
              (v - t1 * t2) / std::sqrt(t1 * t2 * (1.0 - t1) * (1.0 - t2));
          mismatches += g.model.f1()(x, y) != t1;
          mismatches += g.model.f2()(x, y) != t2;
          mismatches += g.model.cross()(x, y) != v;
          mismatches += g.coherence(x, y) != coh;
        }
    }
  }
  return {mismatches == 0, std::to_string(specs) + " specs, " +
                               std::to_string(mismatches) +
                               " inexact midpoint values"};
}

// 8 --------------------------------------------------------------------------
Verdict thinning_consistency() {
  const std::size_t n = 1415;
  const double rho = 0.2;
  const auto f = two_block(0.8, 0.4);
  const auto f12 = two_block(0.7, 0.25);
  const auto dense_model = GraphonPairModel::with_cross_moment(f, f, f12, 1.0, 2);
  const auto direct_model = GraphonPairModel::with_cross_moment(f, f, f12, rho, 2);
  const auto labels = two_block_labels(n);
  const auto dense = sample_joint_table_pair(dense_model, labels, 81);
  const auto thinned = thin(dense, rho, ThinningMode::independent, 82);
  const auto direct = sample_joint_table_pair(direct_model, labels, 83);
  const auto et = block_estimates(thinned.layers[0], thinned.layers[1],
                                  labels.z(), 2, {.gamma = 2, .rho = rho});
  const auto ed = block_estimates(direct.layers[0], direct.layers[1],
                                  labels.z(), 2, {.gamma = 2, .rho = rho});
  double worst = 0.0;  // largest |difference| in standard errors
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = a; c < 2; ++c) {
      const double m = static_cast<double>(et.count(a, c));
      const double x = 0.25 + 0.5 * a, y = 0.25 + 0.5 * c;
      const double p = rho * f(x, y);
      const double p11 = rho * rho * f12(x, y);
      auto z = [&](const EstimateMatrix& e1, const EstimateMatrix& e2,
                   double q) {
        const double se = std::sqrt(2.0 * q * (1 - q) / m);
        return std::abs(*e1(a, c) - *e2(a, c)) / se;
      };
      worst = std::max({worst, z(et.theta1_hat, ed.theta1_hat, p),
                        z(et.theta2_hat, ed.theta2_hat, p),
                        z(et.varrho_hat, ed.varrho_hat, p11)});
    }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "max |thinned - direct| = %.2f standard errors (limit 3)",
                worst);
  return {worst <= 3.0, buf};
}

// 9 --------------------------------------------------------------------------
std::string serialize(const MultiplexSample& s) {
  std::ostringstream os;
  for (const auto& layer : s.layers) write_layer(os, layer);
  write_latents(os, s.latents);
  return os.str();
}

Verdict determinism_and_equivariance() {
  std::vector<std::string> problems;
  // Library level, every mechanism.
  std::vector<SamplerConfig> configs(3);
  configs[0].model = GraphonPairModel::with_coherence(
      gravity_graphon(1.0), gravity_graphon(1.0), constant(0.3), 0.6);
  configs[0].mechanism = Mechanism::joint_table;
  configs[1] = configs[0];
  configs[1].mechanism = Mechanism::mixture;
  configs[2].model = ModulationSpec{distance_graphon(0.9, 2.0), constant(0.6), 0.5};
  configs[2].mechanism = Mechanism::modulation;
  for (auto& c : configs) {
    c.seed = 91;
    c.n = 400;
    if (serialize(generate(c)) != serialize(generate(c))) {
      problems.push_back("sampler rerun differs");
    }
  }

  // CLI level: generate and montecarlo twice.
  const fs::path dir = fs::temp_directory_path() / "multicoh_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "model.json",
             R"({"model": "blockmodel", "block_sizes": [150, 150],
                 "theta1": [[0.6, 0.2], [0.2, 0.6]],
                 "varrho": [[0.45, 0.05], [0.05, 0.45]],
                 "mechanism": "mixture"})");
  const std::string cfg = (dir / "model.json").string();
  std::ostringstream sink;
  for (const char* run : {"a", "b"}) {
    const std::string out = (dir / run).string();
    int rc = cli::run({"generate", cfg, "--out", out, "--seed", "92"}, sink, sink);
    rc |= cli::run({"estimate", out + "/layer1.tsv", out + "/layer2.tsv",
                    "--labels", out + "/latents.tsv", "--coherence-graph",
                    out + "/coh.tsv"},
                   sink, sink);
    rc |= cli::run({"montecarlo", cfg, "--replicates", "3", "--n-grid",
                    "80,120", "--seed", "93", "--out", out + "/mc.csv"},
                   sink, sink);
    if (rc != 0) problems.push_back("cli run failed");
  }
  for (const char* f : {"layer1.tsv", "layer2.tsv", "latents.tsv",
                        "manifest.json", "coh.tsv", "mc.csv",
                        "mc.csv.manifest.json"}) {
    if (read_file(dir / "a" / f) != read_file(dir / "b" / f)) {
      problems.push_back(std::string(f) + " differs");
    }
  }
  fs::remove_all(dir);

  // Node permutation with labels permuted alongside.
  std::mt19937_64 gen(94);
  BlockCoherenceSpec b;
  b.theta1 = {{0.5, 0.1, 0.2}, {0.1, 0.4, 0.3}, {0.2, 0.3, 0.7}};
  b.theta2 = {{0.4, 0.2, 0.2}, {0.2, 0.4, 0.1}, {0.2, 0.1, 0.6}};
  b.varrho = {{0.3, 0.05, 0.1}, {0.05, 0.25, 0.05}, {0.1, 0.05, 0.5}};
  b.labels.resize(300);
  for (auto& z : b.labels) z = static_cast<int>(gen() % 3);
  SamplerConfig c;
  c.seed = 95;
  c.model = b;
  const auto s = generate(c);
  int perm_mismatch = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<int> zp(300);
    for (std::size_t i = 0; i < 300; ++i) zp[i] = b.labels[perm[i]];
    for (DensityScope scope : {DensityScope::cross_layer, DensityScope::per_layer}) {
      const EstimationOptions eo{.gamma = 2, .rho = std::nullopt, .density = scope};
      const auto e = block_estimates(s.layers[0], s.layers[1], b.labels, 3, eo);
      const auto ep = block_estimates(permute(s.layers[0], perm),
                                      permute(s.layers[1], perm), zp, 3, eo);
      perm_mismatch += !(e == ep);
    }
  }
  if (perm_mismatch) problems.push_back("permuted estimates differ");

  std::string detail = "sampler, generate, estimate and montecarlo reruns "
                       "identical; 20 permuted estimates identical";
  if (!problems.empty()) {
    detail.clear();
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
  }
  return {problems.empty(), detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no limit stated
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "moment algebra round trips", 5, moment_algebra},
      {2, "correlation bounds", 5, bounds_correctness},
      {3, "mixture mechanism", 10, mixture_mechanism},
      {4, "modulation model", 10, modulation_model},
      {5, "estimator recovery", 30, estimator_recovery},
      {6, "coherence scaling stability", 60, scaling_stability},
      {7, "blockmodel to graph limit exactness", 1, blockmodel_exactness},
      {8, "thinning consistency", 20, thinning_consistency},
      {9, "determinism and permutation equivariance", 0,
       determinism_and_equivariance},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    const bool in_time = c.limit_seconds == 0 || secs < c.limit_seconds;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("%s  %d. %s: %s [%.2f s", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs);
    if (c.limit_seconds > 0) std::printf(", limit %.0f s", c.limit_seconds);
    std::printf("]%s\n", in_time ? "" : " too slow");
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
