#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "multicoh/samplers.hpp"

namespace multicoh {

// A parsed model configuration document.
//
// Top-level keys:
//   model       "blockmodel" | "graphon" | "negative" | "modulation"
//   rho         sparsity scale in (0, 1]             (default 1)
//   gamma       1 or 2                               (default 2)
//   mechanism   "joint-table" | "mixture" | "modulation"
//   vmean_convention  "target" | "scaled"            (mixture only)
//   block_sizes | block_proportions
//               block structure for matrix-valued functions; sizes give
//               contiguous labels, proportions give multinomial labels
//   K           optional, checked against the matrices
//
// Functions are a number (constant), a K x K matrix (step function on the
// top-level blocks) or an object {"type": "constant"|"gravity"|"distance"|
// "step", ...}.
//   blockmodel/graphon: f1 (alias theta1), f2 (alias theta2, default f1),
//                       and exactly one of f12 (alias varrho) or r0
//   negative:           g, c
//   modulation:         f1, h
struct ModelConfig {
  enum class Kind { blockmodel, graphon, negative, modulation };

  Kind kind = Kind::graphon;
  std::variant<ModulationSpec, GraphonPairModel> model;
  std::optional<BlockPartition> partition;
  LatentLaw latents;
  // Sum of block_sizes, used when no node count is given.
  std::optional<std::size_t> default_n;
  Mechanism mechanism = Mechanism::joint_table;
  VmeanConvention vmean = VmeanConvention::target_correlation;

  int gamma() const;
  double rho() const;
  bool has_labels() const { return latents.kind != LatentLaw::Kind::uniform; }
  std::size_t blocks() const { return partition ? partition->blocks() : 0; }

  // Same configuration under another sparsity scale.
  ModelConfig with_rho(double rho) const;

  // Sampler settings for one run.
  SamplerConfig sampler(std::uint64_t seed, std::size_t n) const;
};

ModelConfig parse_model_config(const nlohmann::json& doc);
ModelConfig load_model_config(const std::filesystem::path& path);

Mechanism parse_mechanism(const std::string& name);
std::string mechanism_name(Mechanism m);

// Conditional correlation and edge coherence the configured sampler
// realizes on each block pair (requires block structure).
struct BlockTargets {
  BlockMatrix r;
  BlockMatrix r0;
};
BlockTargets block_targets(const ModelConfig& config);

// Admissibility of the configured model. Modulation models are admissible
// by construction once their functions validate.
AdmissibilityReport validate_config(const ModelConfig& config,
                                    std::size_t grid_resolution);

}  // namespace multicoh
