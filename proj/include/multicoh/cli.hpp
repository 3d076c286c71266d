#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace multicoh::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kModel = 2,
  kIo = 3,
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

struct GenerateOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::size_t n = 0;          // 0: take the config's block sizes
  std::string mechanism;      // empty: config default
};
int cmd_generate(const GenerateOptions& opts, std::ostream& out);

struct EstimateOptions {
  std::vector<std::filesystem::path> layers;
  std::filesystem::path labels;
  int gamma = 2;
  std::string rho = "auto";
  bool per_layer_density = false;
  std::filesystem::path coherence_graph;  // optional
};
int cmd_estimate(const EstimateOptions& opts, std::ostream& out);

struct ValidateOptions {
  std::filesystem::path config;
  std::size_t grid = 256;
  std::string format = "text";
};
int cmd_validate(const ValidateOptions& opts, std::ostream& out);

struct MonteCarloOptions {
  std::filesystem::path config;
  std::size_t replicates = 1;
  std::vector<std::size_t> n_grid;
  std::vector<double> rho_grid;  // empty: config rho
  std::uint64_t seed = 0;
  std::string mechanism;
  std::string rho_estimate = "known";  // known | auto
  std::filesystem::path out;           // empty: stdout
  std::filesystem::path manifest;      // empty: <out>.manifest.json
  unsigned threads = 0;                // 0: hardware concurrency
};
int cmd_montecarlo(const MonteCarloOptions& opts, std::ostream& out);

inline constexpr const char* kExperimentCsvHeader =
    "replicate,n,rho,gamma,block_a,block_b,stat_name,value";

}  // namespace multicoh::cli
