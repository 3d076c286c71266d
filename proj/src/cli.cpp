#include "multicoh/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "multicoh/config.hpp"
#include "multicoh/errors.hpp"
#include "multicoh/estimation.hpp"
#include "multicoh/io.hpp"

namespace multicoh::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json manifest_base(const std::string& command, std::uint64_t seed,
                   const std::string& config_bytes) {
  json m;
  m["tool"] = "multicoh";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["config_sha256"] = sha256_hex(config_bytes);
  return m;
}

ModelConfig load_with_mechanism(const fs::path& path,
                                const std::string& mechanism) {
  ModelConfig cfg = load_model_config(path);
  if (!mechanism.empty()) cfg.mechanism = parse_mechanism(mechanism);
  return cfg;
}

std::size_t resolve_n(const ModelConfig& cfg, std::size_t n) {
  if (n > 0) return n;
  if (cfg.default_n) return *cfg.default_n;
  throw ConfigError("node count unknown: pass --n or give block_sizes");
}

Adjacency load_layer(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_layer(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Latents load_latents(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_latents(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

fs::path pair_path(const fs::path& base, std::size_t m1, std::size_t m2) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + "_" + std::to_string(m1 + 1) +
                     "_" + std::to_string(m2 + 1) + base.extension().string());
  return p;
}

std::string na_or(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_generate(const GenerateOptions& opts, std::ostream& out) {
  const std::string config_bytes = read_file(opts.config);
  const ModelConfig cfg = load_with_mechanism(opts.config, opts.mechanism);
  const std::size_t n = resolve_n(cfg, opts.n);
  const MultiplexSample sample = generate(cfg.sampler(opts.seed, n));

  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw IoError("cannot create " + opts.out_dir.string());

  json manifest = manifest_base("generate", opts.seed, config_bytes);
  manifest["n"] = n;
  manifest["mechanism"] = mechanism_name(cfg.mechanism);
  manifest["rho"] = cfg.rho();
  manifest["gamma"] = cfg.gamma();
  std::vector<std::string> files;
  for (std::size_t l = 0; l < sample.layer_count(); ++l) {
    std::ostringstream os;
    write_layer(os, sample.layers[l]);
    const std::string name = "layer" + std::to_string(l + 1) + ".tsv";
    write_file(opts.out_dir / name, os.str());
    files.push_back(name);
  }
  std::ostringstream lat;
  write_latents(lat, sample.latents);
  write_file(opts.out_dir / "latents.tsv", lat.str());
  files.push_back("latents.tsv");
  manifest["files"] = files;
  write_file(opts.out_dir / "manifest.json", manifest.dump(2) + "\n");

  out << "wrote " << sample.layer_count() << " layers on " << n
      << " nodes to " << opts.out_dir.string() << '\n';
  return kOk;
}

int cmd_estimate(const EstimateOptions& opts, std::ostream& out) {
  if (opts.layers.size() < 2) {
    throw ConfigError("estimate needs at least two layer files");
  }
  MultiplexSample sample;
  for (const auto& path : opts.layers) {
    sample.layers.push_back(load_layer(path));
    if (sample.layers.back().nodes() != sample.layers.front().nodes()) {
      throw ModelError("layer " + path.string() + " has n = " +
                       std::to_string(sample.layers.back().nodes()) +
                       ", expected " +
                       std::to_string(sample.layers.front().nodes()));
    }
  }
  sample.latents = load_latents(opts.labels);
  if (!sample.latents.has_labels()) {
    throw ConfigError("estimation needs block labels (kind=z latents)");
  }
  if (sample.latents.size() != sample.layers.front().nodes()) {
    throw ModelError("labels cover " + std::to_string(sample.latents.size()) +
                     " nodes but layers have " +
                     std::to_string(sample.layers.front().nodes()));
  }

  EstimationOptions eo;
  eo.gamma = opts.gamma;
  eo.density =
      opts.per_layer_density ? DensityScope::per_layer : DensityScope::cross_layer;
  if (opts.rho != "auto") {
    double rho = 0;
    try {
      std::size_t used = 0;
      rho = std::stod(opts.rho, &used);
      if (used != opts.rho.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("--rho must be 'auto' or a number, got '" + opts.rho +
                        "'");
    }
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("--rho must lie in (0, 1]");
    eo.rho = rho;
  }

  const auto estimates = pairwise_coherence_summary(
      sample, sample.latents.z(), sample.latents.blocks(), eo);
  const bool multi = sample.layer_count() > 2;
  if (multi) {
    out << "layer1,layer2," << kEstimateCsvHeader << '\n';
  } else {
    out << kEstimateCsvHeader << '\n';
  }
  for (const auto& [pair, est] : estimates) {
    const std::string prefix =
        multi ? std::to_string(pair.first + 1) + "," +
                    std::to_string(pair.second + 1) + ","
              : "";
    write_estimate_rows(out, est, prefix);
    if (!opts.coherence_graph.empty()) {
      std::ostringstream os;
      write_coherence_graph(os, est);
      write_file(multi ? pair_path(opts.coherence_graph, pair.first, pair.second)
                       : opts.coherence_graph,
                 os.str());
    }
  }
  return kOk;
}

int cmd_validate(const ValidateOptions& opts, std::ostream& out) {
  if (opts.format != "text" && opts.format != "json") {
    throw ConfigError("--format must be text or json");
  }
  const ModelConfig cfg = load_model_config(opts.config);
  const AdmissibilityReport report = validate_config(cfg, opts.grid);
  if (opts.format == "json") {
    json doc;
    doc["admissible"] = report.admissible();
    doc["points_checked"] = report.points_checked;
    doc["exact"] = report.exact;
    doc["violations"] = json::array();
    for (const auto& v : report.violations) {
      json jv{{"x", v.x}, {"y", v.y},   {"p1", v.p1}, {"p2", v.p2},
              {"r", v.r}, {"lo", v.lo}, {"hi", v.hi}, {"reason", v.reason}};
      if (v.block_a) {
        jv["block_a"] = *v.block_a + 1;
        jv["block_b"] = *v.block_b + 1;
      }
      doc["violations"].push_back(std::move(jv));
    }
    out << doc.dump(2) << '\n';
  } else if (report.admissible()) {
    out << "admissible (" << report.points_checked << " points checked"
        << (report.exact ? ", exact" : ", grid") << ")\n";
  } else {
    out << "inadmissible: " << report.violations.size() << " violation(s) of "
        << report.points_checked << " points checked\n";
    for (const auto& v : report.violations) {
      if (v.block_a) {
        out << "  block (" << *v.block_a + 1 << "," << *v.block_b + 1 << ")";
      } else {
        out << "  (x, y) = (" << v.x << ", " << v.y << ")";
      }
      out << ": " << v.reason << "; p1 = " << v.p1 << ", p2 = " << v.p2
          << ", admissible r in [" << v.lo << ", " << v.hi << "]\n";
    }
  }
  return report.admissible() ? kOk : kModel;
}

// ---------------------------------------------------------------------------

namespace {

struct ExperimentRow {
  std::string replicate;
  std::size_t n;
  double rho;
  int gamma;
  std::size_t a, b;
  std::string stat;
  std::optional<double> value;
};

struct GridPoint {
  std::size_t n;
  double rho;
};

}  // namespace

int cmd_montecarlo(const MonteCarloOptions& opts, std::ostream& out) {
  if (opts.replicates == 0) throw ConfigError("--replicates must be positive");
  if (opts.n_grid.empty()) throw ConfigError("--n-grid must be nonempty");
  if (opts.rho_estimate != "known" && opts.rho_estimate != "auto") {
    throw ConfigError("--rho-estimate must be known or auto");
  }
  const std::string config_bytes = read_file(opts.config);
  const ModelConfig base = load_with_mechanism(opts.config, opts.mechanism);
  if (!base.partition || !base.has_labels()) {
    throw ConfigError(
        "montecarlo needs a config with block_sizes or block_proportions");
  }
  const std::vector<double> rho_grid =
      opts.rho_grid.empty() ? std::vector<double>{base.rho()} : opts.rho_grid;

  std::vector<GridPoint> grid;
  for (std::size_t n : opts.n_grid) {
    if (n < 2) throw ConfigError("grid node counts must be at least 2");
    for (double rho : rho_grid) grid.push_back({n, rho});
  }
  std::vector<ModelConfig> configs;
  std::vector<BlockTargets> targets;
  for (const auto& g : grid) {
    configs.push_back(base.with_rho(g.rho));
    targets.push_back(block_targets(configs.back()));
  }
  const std::size_t k = base.blocks();
  const int gamma = base.gamma();

  // One task per (grid point, replicate); results land in fixed slots.
  const std::size_t tasks = grid.size() * opts.replicates;
  std::vector<CoherenceEstimate> results(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      try {
        const std::size_t gi = t / opts.replicates;
        const std::uint64_t seed = derive_seed(opts.seed, t);
        const MultiplexSample s =
            generate(configs[gi].sampler(seed, grid[gi].n));
        EstimationOptions eo;
        eo.gamma = gamma;
        if (opts.rho_estimate == "known") eo.rho = grid[gi].rho;
        results[t] = block_estimates(s.layers[0], s.layers[1], s.latents.z(),
                                     k, eo);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  unsigned threads = opts.threads ? opts.threads
                                  : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ExperimentRow> rows;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto [n, rho] = grid[gi];
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) {
        const double target = targets[gi].r0(a, b);
        double sum_r0 = 0.0, sum_err = 0.0;
        std::size_t defined = 0;
        for (std::size_t rep = 0; rep < opts.replicates; ++rep) {
          const CoherenceEstimate& est = results[gi * opts.replicates + rep];
          const std::string id = std::to_string(rep + 1);
          auto row = [&](const char* stat, std::optional<double> v) {
            rows.push_back({id, n, rho, gamma, a + 1, b + 1, stat, v});
          };
          row("theta1_hat", est.theta1_hat(a, b));
          row("theta2_hat", est.theta2_hat(a, b));
          row("varrho_hat", est.varrho_hat(a, b));
          // Degenerate blocks take the zero-correlation convention here so
          // error statistics stay defined.
          std::optional<double> r = est.r_hat(a, b);
          std::optional<double> r0 = est.r0_hat(a, b);
          if (est.count(a, b) > 0 && !r) {
            r = 0.0;
            r0 = 0.0;
          }
          row("r_hat", r);
          row("r0_hat", r0);
          row("r0_target", target);
          std::optional<double> err;
          if (r0) {
            err = std::abs(*r0 - target);
            sum_r0 += *r0;
            sum_err += *err;
            ++defined;
          }
          row("r0_abs_err", err);
        }
        auto mean = [&](double s) {
          return defined ? std::optional<double>(s / static_cast<double>(defined))
                         : std::nullopt;
        };
        rows.push_back({"mean", n, rho, gamma, a + 1, b + 1, "r0_hat", mean(sum_r0)});
        rows.push_back({"mean", n, rho, gamma, a + 1, b + 1, "r0_mae", mean(sum_err)});
      }
    }
  }

  std::ostringstream csv;
  csv << kExperimentCsvHeader << '\n';
  for (const auto& r : rows) {
    csv << r.replicate << ',' << r.n << ',' << format_double(r.rho) << ','
        << r.gamma << ',' << r.a << ',' << r.b << ',' << r.stat << ','
        << na_or(r.value) << '\n';
  }

  json manifest = manifest_base("montecarlo", opts.seed, config_bytes);
  manifest["replicates"] = opts.replicates;
  manifest["n_grid"] = opts.n_grid;
  manifest["rho_grid"] = rho_grid;
  manifest["mechanism"] = mechanism_name(base.mechanism);
  manifest["gamma"] = gamma;
  manifest["rho_estimate"] = opts.rho_estimate;
  manifest["rows"] = rows.size();

  if (opts.out.empty()) {
    out << csv.str();
    if (!opts.manifest.empty()) {
      write_file(opts.manifest, manifest.dump(2) + "\n");
    }
  } else {
    write_file(opts.out, csv.str());
    const fs::path mpath = opts.manifest.empty()
                               ? fs::path(opts.out.string() + ".manifest.json")
                               : opts.manifest;
    write_file(mpath, manifest.dump(2) + "\n");
    out << "wrote " << rows.size() << " rows to " << opts.out.string() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Correlated multiplex random graphs and edge coherence",
               "multicoh"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Sample a multiplex graph");
  g->add_option("config", gen.config, "Model config (JSON)")->required();
  g->add_option("--out", gen.out_dir, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--n", gen.n, "Node count (default: sum of block_sizes)");
  g->add_option("--mechanism", gen.mechanism,
                "joint-table | mixture | modulation");

  EstimateOptions est;
  auto* e = app.add_subcommand("estimate", "Estimate block coherence");
  e->add_option("layers", est.layers, "Layer edge-list files")->required();
  e->add_option("--labels", est.labels, "Latents file with block labels")
      ->required();
  e->add_option("--gamma", est.gamma, "Cross-moment scaling exponent (1 or 2)");
  e->add_option("--rho", est.rho, "Density scale: auto or a value");
  e->add_flag("--per-layer-density", est.per_layer_density,
              "Use the geometric mean of per-layer densities for auto rho");
  e->add_option("--coherence-graph", est.coherence_graph,
                "Also write the coherence graph edge list here");

  ValidateOptions val;
  auto* v = app.add_subcommand("validate", "Check model admissibility");
  v->add_option("config", val.config, "Model config (JSON)")->required();
  v->add_option("--grid", val.grid, "Grid resolution for smooth models");
  v->add_option("--format", val.format, "text | json");

  MonteCarloOptions mc;
  auto* m = app.add_subcommand("montecarlo", "Repeated generate + estimate");
  m->add_option("config", mc.config, "Model config (JSON)")->required();
  m->add_option("--replicates", mc.replicates, "Replicates per grid point");
  m->add_option("--n-grid", mc.n_grid, "Node counts")
      ->delimiter(',')
      ->required();
  m->add_option("--rho-grid", mc.rho_grid, "Sparsity scales")->delimiter(',');
  m->add_option("--seed", mc.seed, "Master seed");
  m->add_option("--mechanism", mc.mechanism, "Override the config mechanism");
  m->add_option("--rho-estimate", mc.rho_estimate,
                "Scale used for r0: known | auto");
  m->add_option("--out", mc.out, "CSV output (default stdout)");
  m->add_option("--manifest", mc.manifest, "Run manifest path");
  m->add_option("--threads", mc.threads, "Worker threads (0: all cores)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    app.exit(ex, out, err);
    return kOk;
  } catch (const CLI::CallForVersion& ex) {
    app.exit(ex, out, err);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*e) return cmd_estimate(est, out);
    if (*v) return cmd_validate(val, out);
    return cmd_montecarlo(mc, out);
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kIo;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kModel;
  } catch (const nlohmann::json::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kModel;
  }
}

}  // namespace multicoh::cli
