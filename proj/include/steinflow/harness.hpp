#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steinflow/asvgd.hpp"
#include "steinflow/baselines.hpp"
#include "steinflow/metrics.hpp"
#include "steinflow/snapshot_io.hpp"

namespace steinflow {

// Bad command line or an experiment that fails validation. Exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SamplerKind { Asvgd, Svgd, Ula, Mala, Uld };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

// Target by name. Gaussian targets take a mean and either a covariance or a
// precision (row-major); without either the precision is the identity.
struct TargetSpec {
  std::string name = "gaussian";
  Vector mean;
  std::optional<Matrix> covariance;
  std::optional<Matrix> precision;

  Index dim() const;
  Target build() const;
  bool operator==(const TargetSpec& other) const;
};

struct ExperimentSpec {
  SamplerKind sampler = SamplerKind::Asvgd;
  TargetSpec target;

  std::string kernel_name = "gaussian";  // gaussian | bilinear
  double sigma = 0.1;                     // Gaussian bandwidth; sigma2 = sigma^2
  Matrix matrix_a;                        // bilinear A; identity when empty

  InitSpec init;
  double tau = 0.1;
  double eps = 0.1;
  Damping damping = AdaptiveRestart{};
  std::size_t steps = 1000;
  double friction = 1.0;
  BilinearTraceLag trace_lag = BilinearTraceLag::Mixed;
  GradientRestartRule restart_rule = GradientRestartRule::EnergyIncrease;
  GaussianInteraction gaussian_interaction = GaussianInteraction::Derived;

  std::filesystem::path out_dir = "out";
  std::size_t snapshot_every = 100;
  std::size_t metric_every = 10;
  std::size_t trajectory_count = 50;
  bool trajectory_all = false;
  int kl_grid = 400;

  KernelSpec kernel() const;
  AsvgdConfig asvgd_config() const;
  BaselineConfig baseline_config() const;

  // Throws UsageError when any part of the experiment is invalid.
  void validate() const;
};

// Flat key=value lines under a [run] section, one per `run` flag, enough to
// replay the experiment with `steinflow --config <file> run`.
std::vector<std::pair<std::string, std::string>> manifest_entries(const ExperimentSpec& spec);
void write_manifest(const std::filesystem::path& path, const ExperimentSpec& spec);

std::unique_ptr<Sampler> make_sampler(const ExperimentSpec& spec, const Target& target, Ensemble initial);

struct ExperimentResult {
  std::vector<StepRecord> metrics;
  Ensemble final_state;
};

// Runs one experiment and writes metrics.csv, particles_init.csv,
// particles_final.csv, particles_<step>.csv, trajectory_<i>.csv and
// manifest.txt into spec.out_dir.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct CompareResult {
  std::vector<std::string> labels;
  std::vector<ExperimentResult> runs;
};

// Column labels for a list of samplers: the sampler name, suffixed _2, _3, ...
// on repeats.
std::vector<std::string> compare_labels(const std::vector<ExperimentSpec>& specs);

// Runs every spec from the first spec's initial ensemble and writes
// kl_compare.csv (one KL column per sampler) into out_dir. Each spec writes
// its own files into its out_dir.
CompareResult compare(const std::vector<ExperimentSpec>& specs, const std::filesystem::path& out_dir);

// Named experiment sets: fig1, fig2-quartic, fig2-bananas, fig2-anisotropic.
std::vector<ExperimentSpec> preset_specs(const std::string& name, std::uint64_t seed);
std::vector<std::string> preset_names();

struct CliRequest {
  enum class Mode { Run, Compare, Help };
  Mode mode = Mode::Help;
  std::vector<ExperimentSpec> specs;
  std::filesystem::path out_dir;
  std::string message;
};

// Throws UsageError (carrying the usage text) on bad input.
CliRequest parse_cli(int argc, const char* const* argv);

// Exit status: 0 success, 1 usage error, 2 numerical abort, 3 I/O failure.
int cli_main(int argc, const char* const* argv);

}  // namespace steinflow
