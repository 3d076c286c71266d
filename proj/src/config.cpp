#include "multicoh/config.hpp"

#include <cmath>
#include <sstream>

#include "multicoh/errors.hpp"
#include "multicoh/io.hpp"

namespace multicoh {

namespace {

using nlohmann::json;

BlockMatrix parse_matrix(const json& j, const char* key) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(key) + " must be a nonempty K x K array");
  }
  const std::size_t k = j.size();
  BlockMatrix m(k);
  for (std::size_t a = 0; a < k; ++a) {
    if (!j[a].is_array() || j[a].size() != k) {
      throw ConfigError(std::string(key) + " must be square");
    }
    for (std::size_t b = 0; b < k; ++b) {
      if (!j[a][b].is_number()) {
        throw ConfigError(std::string(key) + " entries must be numbers");
      }
      m(a, b) = j[a][b].get<double>();
    }
  }
  if (!m.is_symmetric()) {
    throw ConfigError(std::string(key) + " must be symmetric");
  }
  return m;
}

double number(const json& obj, const char* key, std::optional<double> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("missing numeric key '") + key + "'");
  }
  if (!obj.at(key).is_number()) {
    throw ConfigError(std::string("key '") + key + "' must be a number");
  }
  return obj.at(key).get<double>();
}

std::optional<BlockPartition> parse_partition(const json& obj,
                                              std::vector<double>& weights,
                                              bool& contiguous,
                                              std::optional<std::size_t>& n) {
  if (obj.contains("block_sizes") && obj.contains("block_proportions")) {
    throw ConfigError("give block_sizes or block_proportions, not both");
  }
  if (obj.contains("block_sizes")) {
    const auto sizes = obj.at("block_sizes").get<std::vector<std::size_t>>();
    std::size_t total = 0;
    for (std::size_t h : sizes) {
      weights.push_back(static_cast<double>(h));
      total += h;
    }
    contiguous = true;
    n = total;
    return BlockPartition::from_sizes(sizes);
  }
  if (obj.contains("block_proportions")) {
    weights = obj.at("block_proportions").get<std::vector<double>>();
    contiguous = false;
    return BlockPartition::from_proportions(weights);
  }
  return std::nullopt;
}

// Constants become step functions on the config's blocks so that they
// combine with block matrices and block labels.
SymmetricFunction constant_on(double c,
                              const std::optional<BlockPartition>& part) {
  if (!part) return SymmetricFunction::constant(c);
  return SymmetricFunction::step(
      StepFunction(*part, BlockMatrix(part->blocks(), c)));
}

SymmetricFunction parse_function(const json& j, const char* key,
                                 const std::optional<BlockPartition>& part) {
  if (j.is_number()) return constant_on(j.get<double>(), part);
  if (j.is_array()) {
    BlockMatrix m = parse_matrix(j, key);
    if (!part) {
      if (m.size() != 1) {
        throw ConfigError(std::string(key) +
                          " is a block matrix but the config has no "
                          "block_sizes or block_proportions");
      }
      return SymmetricFunction::step(
          StepFunction(BlockPartition::single(), std::move(m)));
    }
    if (m.size() != part->blocks()) {
      throw ConfigError(std::string(key) + " is " + std::to_string(m.size()) +
                        " x " + std::to_string(m.size()) + " but there are " +
                        std::to_string(part->blocks()) + " blocks");
    }
    return SymmetricFunction::step(StepFunction(*part, std::move(m)));
  }
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError(std::string(key) +
                      " must be a number, a matrix, or an object with 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "constant") return constant_on(number(j, "value", {}), part);
  if (type == "gravity") return gravity_graphon(number(j, "c", 1.0));
  if (type == "distance") {
    return distance_graphon(number(j, "c", 1.0), number(j, "beta", 1.0));
  }
  if (type == "step") {
    std::vector<double> w;
    bool contiguous = false;
    std::optional<std::size_t> n;
    auto own = parse_partition(j, w, contiguous, n);
    if (!own) own = part;
    return parse_function(j.at("values"), key, own);
  }
  throw ConfigError(std::string("unknown function type '") + type + "' for " +
                    key);
}

const json* find_alias(const json& obj, const char* key, const char* alias) {
  if (obj.contains(key) && obj.contains(alias)) {
    throw ConfigError(std::string("give ") + key + " or " + alias +
                      ", not both");
  }
  if (obj.contains(key)) return &obj.at(key);
  if (obj.contains(alias)) return &obj.at(alias);
  return nullptr;
}

VmeanConvention parse_vmean(const std::string& s) {
  if (s == "target") return VmeanConvention::target_correlation;
  if (s == "scaled") return VmeanConvention::scaled_coherence;
  throw ConfigError("vmean_convention must be 'target' or 'scaled'");
}

// Frechet range checks with block-pair diagnostics for a matrix-valued
// cross moment.
void check_block_moments(const GraphonPairModel& model) {
  const auto part = model.shared_partition();
  if (!part || model.cross_kind() != CrossKind::moment) return;
  const double rho = model.rho();
  auto scale = [](const BlockMatrix& m, double c) {
    BlockMatrix out = m;
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = 0; b < m.size(); ++b) out(a, b) *= c;
    }
    return out;
  };
  BlockCoherenceSpec spec;
  spec.theta1 = scale(model.f1().as_step()->values(), rho);
  spec.theta2 = scale(model.f2().as_step()->values(), rho);
  spec.varrho =
      scale(model.cross().as_step()->values(), std::pow(rho, model.gamma()));
  spec.block_sizes.assign(part->blocks(), 1);
  blockmodel_to_graphons(spec);
}

}  // namespace

Mechanism parse_mechanism(const std::string& name) {
  if (name == "joint-table") return Mechanism::joint_table;
  if (name == "mixture") return Mechanism::mixture;
  if (name == "modulation") return Mechanism::modulation;
  throw ConfigError("unknown mechanism '" + name +
                    "' (expected joint-table, mixture or modulation)");
}

std::string mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::joint_table:
      return "joint-table";
    case Mechanism::mixture:
      return "mixture";
    case Mechanism::modulation:
      return "modulation";
  }
  return "unknown";
}

int ModelConfig::gamma() const {
  if (const auto* m = std::get_if<GraphonPairModel>(&model)) return m->gamma();
  return 1;
}

double ModelConfig::rho() const {
  if (const auto* m = std::get_if<GraphonPairModel>(&model)) return m->rho();
  return std::get<ModulationSpec>(model).rho;
}

ModelConfig ModelConfig::with_rho(double rho) const {
  ModelConfig out = *this;
  if (const auto* m = std::get_if<GraphonPairModel>(&model)) {
    out.model = m->with_rho(rho);
    check_block_moments(std::get<GraphonPairModel>(out.model));
  } else {
    auto spec = std::get<ModulationSpec>(model);
    spec.rho = rho;
    spec.validate();
    out.model = std::move(spec);
  }
  return out;
}

SamplerConfig ModelConfig::sampler(std::uint64_t seed, std::size_t n) const {
  SamplerConfig sc;
  sc.seed = seed;
  sc.n = n;
  sc.mechanism = mechanism;
  sc.latents = latents;
  sc.vmean = vmean;
  if (const auto* m = std::get_if<GraphonPairModel>(&model)) {
    sc.model = *m;
  } else {
    sc.model = std::get<ModulationSpec>(model);
  }
  return sc;
}

ModelConfig parse_model_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ModelConfig cfg;
  const auto kind = doc.value("model", std::string("blockmodel"));
  if (kind == "blockmodel") {
    cfg.kind = ModelConfig::Kind::blockmodel;
  } else if (kind == "graphon") {
    cfg.kind = ModelConfig::Kind::graphon;
  } else if (kind == "negative") {
    cfg.kind = ModelConfig::Kind::negative;
  } else if (kind == "modulation") {
    cfg.kind = ModelConfig::Kind::modulation;
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }

  std::vector<double> weights;
  bool contiguous = false;
  cfg.partition = parse_partition(doc, weights, contiguous, cfg.default_n);
  if (cfg.partition) {
    cfg.latents = contiguous ? LatentLaw::contiguous(weights)
                             : LatentLaw::multinomial(weights);
  }
  if (cfg.kind == ModelConfig::Kind::blockmodel && !cfg.partition) {
    // A blockmodel without explicit blocks has equal proportions.
    const json* t1 = find_alias(doc, "f1", "theta1");
    if (!t1 || !t1->is_array()) {
      throw ConfigError("blockmodel needs a theta1 matrix");
    }
    weights.assign(t1->size(), 1.0 / static_cast<double>(t1->size()));
    cfg.partition = BlockPartition::from_proportions(weights);
    cfg.latents = LatentLaw::multinomial(weights);
  }
  if (doc.contains("K") && cfg.partition &&
      doc.at("K").get<std::size_t>() != cfg.partition->blocks()) {
    throw ConfigError("K = " + std::to_string(doc.at("K").get<std::size_t>()) +
                      " does not match " +
                      std::to_string(cfg.partition->blocks()) + " blocks");
  }

  const double rho = number(doc, "rho", 1.0);
  const int gamma = static_cast<int>(number(doc, "gamma", 2.0));
  if (doc.contains("vmean_convention")) {
    cfg.vmean = parse_vmean(doc.at("vmean_convention").get<std::string>());
  }

  switch (cfg.kind) {
    case ModelConfig::Kind::blockmodel:
    case ModelConfig::Kind::graphon: {
      const json* f1j = find_alias(doc, "f1", "theta1");
      if (!f1j) throw ConfigError("missing f1 / theta1");
      const json* f2j = find_alias(doc, "f2", "theta2");
      auto f1 = parse_function(*f1j, "f1", cfg.partition);
      auto f2 = f2j ? parse_function(*f2j, "f2", cfg.partition) : f1;
      const json* f12j = find_alias(doc, "f12", "varrho");
      const json* r0j = doc.contains("r0") ? &doc.at("r0") : nullptr;
      if ((f12j != nullptr) == (r0j != nullptr)) {
        throw ConfigError("give exactly one of f12 / varrho or r0");
      }
      GraphonPairModel m =
          f12j ? GraphonPairModel::with_cross_moment(
                     f1, f2, parse_function(*f12j, "f12", cfg.partition), rho,
                     gamma)
               : GraphonPairModel::with_coherence(
                     f1, f2, parse_function(*r0j, "r0", cfg.partition), rho,
                     gamma);
      check_block_moments(m);
      cfg.model = std::move(m);
      cfg.mechanism = Mechanism::joint_table;
      break;
    }
    case ModelConfig::Kind::negative: {
      if (!doc.contains("g")) throw ConfigError("negative model needs g");
      cfg.model = build_negative_pair_model(
          parse_function(doc.at("g"), "g", cfg.partition), number(doc, "c", {}),
          rho);
      cfg.mechanism = Mechanism::joint_table;
      break;
    }
    case ModelConfig::Kind::modulation: {
      if (!doc.contains("f1") || !doc.contains("h")) {
        throw ConfigError("modulation model needs f1 and h");
      }
      ModulationSpec spec{parse_function(doc.at("f1"), "f1", cfg.partition),
                          parse_function(doc.at("h"), "h", cfg.partition), rho};
      spec.validate();
      cfg.model = std::move(spec);
      cfg.mechanism = Mechanism::modulation;
      break;
    }
  }
  if (doc.contains("mechanism")) {
    cfg.mechanism = parse_mechanism(doc.at("mechanism").get<std::string>());
  }
  return cfg;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_model_config(doc);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

BlockTargets block_targets(const ModelConfig& config) {
  if (!config.partition) {
    throw ConfigError("block targets need a config with block structure");
  }
  const BlockPartition& part = *config.partition;
  const std::size_t k = part.blocks();
  BlockTargets t{BlockMatrix(k), BlockMatrix(k)};
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double x = part.midpoint(a), y = part.midpoint(b);
      if (const auto* m = std::get_if<GraphonPairModel>(&config.model)) {
        double r = edge_probs_at(*m, x, y).r;
        if (config.mechanism == Mechanism::mixture &&
            config.vmean == VmeanConvention::scaled_coherence) {
          r = m->rho() * m->rho() * edge_coherence(r, m->rho(), m->gamma());
        }
        t.r(a, b) = r;
        t.r0(a, b) = edge_coherence(r, m->rho(), m->gamma());
      } else {
        const auto& spec = std::get<ModulationSpec>(config.model);
        t.r(a, b) = t.r0(a, b) = modulation_correlation(spec, x, y);
      }
    }
  }
  return t;
}

AdmissibilityReport validate_config(const ModelConfig& config,
                                    std::size_t grid_resolution) {
  if (const auto* m = std::get_if<GraphonPairModel>(&config.model)) {
    return admissibility_report(*m, grid_resolution);
  }
  std::get<ModulationSpec>(config.model).validate();
  AdmissibilityReport report;
  report.exact = true;
  return report;
}

}  // namespace multicoh
