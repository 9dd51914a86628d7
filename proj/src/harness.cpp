#include "steinflow/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string_view>

namespace steinflow {

namespace fs = std::filesystem;

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Asvgd: return "asvgd";
    case SamplerKind::Svgd: return "svgd";
    case SamplerKind::Ula: return "ula";
    case SamplerKind::Mala: return "mala";
    case SamplerKind::Uld: return "uld";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  for (auto kind : {SamplerKind::Asvgd, SamplerKind::Svgd, SamplerKind::Ula, SamplerKind::Mala, SamplerKind::Uld})
    if (to_string(kind) == name) return kind;
  throw UsageError("unknown sampler '" + name + "' (expected asvgd, svgd, ula, mala or uld)");
}

// ---------------------------------------------------------------------------
// Target and experiment specs

Index TargetSpec::dim() const { return name == "gaussian" ? mean.size() : 2; }

Target TargetSpec::build() const {
  try {
    if (name == "quartic") return quartic_target();
    if (name == "double-bananas") return double_bananas_target();
    if (name == "gaussian") {
      if (covariance) return gaussian_target_from_covariance(*covariance, mean);
      return gaussian_target(precision ? *precision : Matrix::Identity(mean.size(), mean.size()), mean);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unknown target '" + name + "' (expected gaussian, quartic or double-bananas)");
}

bool TargetSpec::operator==(const TargetSpec& other) const {
  auto same = [](const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->rows() == b->rows() && a->cols() == b->cols() && *a == *b);
  };
  return name == other.name && mean.size() == other.mean.size() && mean == other.mean &&
         same(covariance, other.covariance) && same(precision, other.precision);
}

KernelSpec ExperimentSpec::kernel() const {
  if (kernel_name == "bilinear") {
    const Index d = init.mean.size();
    return BilinearKernel{matrix_a.size() == 0 ? Matrix(Matrix::Identity(d, d)) : matrix_a};
  }
  return GaussianKernel{sigma * sigma};
}

AsvgdConfig ExperimentSpec::asvgd_config() const {
  AsvgdConfig c;
  c.tau = tau;
  c.eps = eps;
  c.kernel = kernel();
  c.damping = damping;
  c.steps = steps;
  c.trace_lag = trace_lag;
  c.restart_rule = restart_rule;
  c.gaussian_interaction = gaussian_interaction;
  return c;
}

BaselineConfig ExperimentSpec::baseline_config() const {
  BaselineConfig c;
  c.tau = tau;
  c.steps = steps;
  c.kernel = kernel();
  c.friction = friction;
  c.seed = init.seed;
  return c;
}

void ExperimentSpec::validate() const {
  if (kernel_name != "gaussian" && kernel_name != "bilinear")
    throw UsageError("unknown kernel '" + kernel_name + "' (expected gaussian or bilinear)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("--sigma must be positive");
  if (init.count < 1) throw UsageError("--n must be at least 1");
  if (snapshot_every < 1) throw UsageError("--snapshot-every must be at least 1");
  if (metric_every < 1) throw UsageError("--metric-every must be at least 1");
  if (kl_grid < kMinGridPointsPerDim) throw UsageError("--kl-grid must be at least 16");

  const Index d = target.dim();
  if (d < 1) throw UsageError("target dimension must be at least 1");
  if (init.mean.size() != d) throw UsageError("--init-mean must have one entry per target dimension");
  if (init.covariance.rows() != d || init.covariance.cols() != d)
    throw UsageError("--init-cov must hold d*d entries");
  if (!init.covariance.isApprox(init.covariance.transpose(), 1e-12) ||
      Eigen::LLT<Matrix>(init.covariance).info() != Eigen::Success)
    throw UsageError("--init-cov is not symmetric positive definite");
  target.build();

  try {
    validate_kernel(kernel(), d);
    asvgd_config().validate();
    baseline_config().validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string format_list(const double* data, Index size) {
  std::string out = "[";
  for (Index i = 0; i < size; ++i) out += (i ? "," : "") + format_double(data[i]);
  return out + "]";
}

std::string format_vector(const Vector& v) { return format_list(v.data(), v.size()); }

std::string format_matrix(const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return format_list(rm.data(), rm.size());
}

std::string quoted(const std::string& s) { return '"' + s + '"'; }

const char* trace_lag_name(BilinearTraceLag v) { return v == BilinearTraceLag::Mixed ? "mixed" : "current"; }
const char* restart_rule_name(GradientRestartRule v) {
  return v == GradientRestartRule::EnergyIncrease ? "energy-increase" : "as-printed";
}
const char* interaction_name(GaussianInteraction v) {
  return v == GaussianInteraction::Derived ? "derived" : "as-printed";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> manifest_entries(const ExperimentSpec& spec) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("sampler", quoted(to_string(spec.sampler)));
  kv.emplace_back("target", quoted(spec.target.name));
  if (spec.target.name == "gaussian") {
    kv.emplace_back("target-mean", format_vector(spec.target.mean));
    if (spec.target.covariance) kv.emplace_back("target-cov", format_matrix(*spec.target.covariance));
    if (spec.target.precision) kv.emplace_back("target-precision", format_matrix(*spec.target.precision));
  }
  kv.emplace_back("kernel", quoted(spec.kernel_name));
  kv.emplace_back("sigma", format_double(spec.sigma));
  if (spec.kernel_name == "bilinear") {
    const auto a = std::get<BilinearKernel>(spec.kernel()).a;
    kv.emplace_back("matrix-a", format_matrix(a));
  }
  kv.emplace_back("tau", format_double(spec.tau));
  kv.emplace_back("eps", format_double(spec.eps));
  kv.emplace_back("n", std::to_string(spec.init.count));
  kv.emplace_back("steps", std::to_string(spec.steps));
  kv.emplace_back("seed", std::to_string(spec.init.seed));
  if (const auto* c = std::get_if<ConstantDamping>(&spec.damping)) {
    kv.emplace_back("damping", quoted("constant"));
    kv.emplace_back("beta", format_double(c->beta));
  } else {
    kv.emplace_back("damping", quoted("restart"));
  }
  kv.emplace_back("friction", format_double(spec.friction));
  kv.emplace_back("init-mean", format_vector(spec.init.mean));
  kv.emplace_back("init-cov", format_matrix(spec.init.covariance));
  kv.emplace_back("trace-lag", quoted(trace_lag_name(spec.trace_lag)));
  kv.emplace_back("restart-rule", quoted(restart_rule_name(spec.restart_rule)));
  kv.emplace_back("gaussian-interaction", quoted(interaction_name(spec.gaussian_interaction)));
  kv.emplace_back("out", quoted(spec.out_dir.generic_string()));
  kv.emplace_back("snapshot-every", std::to_string(spec.snapshot_every));
  kv.emplace_back("metric-every", std::to_string(spec.metric_every));
  kv.emplace_back("trajectories", std::to_string(spec.trajectory_count));
  kv.emplace_back("trajectory-all", spec.trajectory_all ? "true" : "false");
  kv.emplace_back("kl-grid", std::to_string(spec.kl_grid));
  return kv;
}

void write_manifest(const fs::path& path, const ExperimentSpec& spec) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "[run]\n";
  for (const auto& [key, value] : manifest_entries(spec)) out << key << '=' << value << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Running

std::unique_ptr<Sampler> make_sampler(const ExperimentSpec& spec, const Target& target, Ensemble initial) {
  switch (spec.sampler) {
    case SamplerKind::Asvgd: return std::make_unique<AsvgdSampler>(spec.asvgd_config(), target, std::move(initial));
    case SamplerKind::Svgd: return std::make_unique<SvgdSampler>(spec.baseline_config(), target, std::move(initial));
    case SamplerKind::Ula: return std::make_unique<UlaSampler>(spec.baseline_config(), target, std::move(initial));
    case SamplerKind::Mala: return std::make_unique<MalaSampler>(spec.baseline_config(), target, std::move(initial));
    case SamplerKind::Uld: return std::make_unique<UldSampler>(spec.baseline_config(), target, std::move(initial));
  }
  throw UsageError("unknown sampler");
}

namespace {

std::vector<Index> trajectory_indices(const ExperimentSpec& spec) {
  const Index n = spec.init.count;
  std::vector<Index> out;
  if (spec.trajectory_all) {
    for (Index i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  const Index count = std::min<Index>(n, static_cast<Index>(spec.trajectory_count));
  for (Index k = 0; k < count; ++k) out.push_back(k * n / count);
  return out;
}

class MetricsWriter {
 public:
  MetricsWriter(const fs::path& path, Index dim) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    out_ << "step,kl";
    for (Index j = 0; j < dim; ++j) out_ << ",mean_" << j;
    out_ << ",cov_trace,restart_fraction,alpha_mean\n";
  }

  void write(const StepRecord& r) {
    out_ << r.step << ',' << format_double(r.kl_estimate);
    for (Index j = 0; j < r.mean.size(); ++j) out_ << ',' << format_double(r.mean(j));
    out_ << ',' << format_double(r.cov_trace) << ',' << format_double(r.restart_fraction) << ','
         << format_double(r.alpha_mean) << '\n';
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_trajectory(const fs::path& path, const std::vector<double>& rows, Index dim) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "step";
  for (Index j = 0; j < dim; ++j) out << ",x" << j;
  out << '\n';
  const std::size_t stride = static_cast<std::size_t>(dim);
  for (std::size_t s = 0; s * stride < rows.size(); ++s) {
    out << s;
    for (std::size_t j = 0; j < stride; ++j) out << ',' << format_double(rows[s * stride + j]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ExperimentResult run_from(const ExperimentSpec& spec, const Target& target, double log_z, Ensemble initial) {
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw IoError("cannot create " + spec.out_dir.string() + ": " + ec.message());

  write_manifest(spec.out_dir / "manifest.txt", spec);
  write_particles_csv(spec.out_dir / "particles_init.csv", initial.positions);

  const Index d = initial.dim();
  const std::vector<Index> tracked = trajectory_indices(spec);
  std::vector<std::vector<double>> paths(tracked.size());
  auto record_paths = [&](const Ensemble& e) {
    for (std::size_t t = 0; t < tracked.size(); ++t)
      for (Index j = 0; j < d; ++j) paths[t].push_back(e.positions(tracked[t], j));
  };

  ExperimentResult result;
  MetricsWriter metrics(spec.out_dir / "metrics.csv", d);
  auto record_metrics = [&](const Ensemble& e, const StepStats& stats) {
    result.metrics.push_back(make_step_record(e, stats, target, log_z));
    metrics.write(result.metrics.back());
  };

  record_paths(initial);
  record_metrics(initial, StepStats{});

  auto sampler = make_sampler(spec, target, std::move(initial));
  const StepHook hook = [&](const Ensemble& e, const StepStats& stats) {
    record_paths(e);
    if (stats.step % spec.snapshot_every == 0)
      write_particles_csv(spec.out_dir / ("particles_" + std::to_string(stats.step) + ".csv"), e.positions);
    if (stats.step % spec.metric_every == 0 || stats.step == spec.steps) record_metrics(e, stats);
  };
  RunRecord run = run_sampler(*sampler, spec.steps, hook);

  write_particles_csv(spec.out_dir / "particles_final.csv", run.final_state.positions);
  for (std::size_t t = 0; t < tracked.size(); ++t)
    write_trajectory(spec.out_dir / ("trajectory_" + std::to_string(tracked[t]) + ".csv"), paths[t], d);

  result.final_state = std::move(run.final_state);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Target target = spec.target.build();
  return run_from(spec, target, log_normalizer(target, spec.kl_grid), init_ensemble(spec.init));
}

std::vector<std::string> compare_labels(const std::vector<ExperimentSpec>& specs) {
  std::map<std::string, int> seen;
  std::vector<std::string> labels;
  for (const auto& s : specs) {
    const std::string base = to_string(s.sampler);
    const int k = ++seen[base];
    labels.push_back(k == 1 ? base : base + "_" + std::to_string(k));
  }
  return labels;
}

CompareResult compare(const std::vector<ExperimentSpec>& specs, const fs::path& out_dir) {
  if (specs.empty()) throw UsageError("compare needs at least one sampler");
  for (const auto& s : specs) {
    s.validate();
    if (!(s.target == specs.front().target)) throw UsageError("compare: all samplers must share the target");
    if (s.init.count != specs.front().init.count)
      throw UsageError("compare: all samplers must share the particle count");
  }

  const Target target = specs.front().target.build();
  const double log_z = log_normalizer(target, specs.front().kl_grid);
  const Ensemble initial = init_ensemble(specs.front().init);

  CompareResult result;
  result.labels = compare_labels(specs);
  for (const auto& s : specs) result.runs.push_back(run_from(s, target, log_z, initial));

  std::map<std::size_t, std::vector<std::optional<double>>> table;
  for (std::size_t c = 0; c < result.runs.size(); ++c)
    for (const auto& r : result.runs[c].metrics) {
      auto& row = table[r.step];
      row.resize(result.runs.size());
      row[c] = r.kl_estimate;
    }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const fs::path path = out_dir / "kl_compare.csv";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "step";
  for (const auto& label : result.labels) out << ',' << label;
  out << '\n';
  for (const auto& [step, row] : table) {
    out << step;
    for (std::size_t c = 0; c < result.runs.size(); ++c)
      out << ',' << (c < row.size() && row[c] ? format_double(*row[c]) : "");
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
  return result;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<ExperimentSpec> with_samplers(const ExperimentSpec& base, std::initializer_list<SamplerKind> kinds) {
  std::vector<ExperimentSpec> out;
  for (auto k : kinds) {
    out.push_back(base);
    out.back().sampler = k;
  }
  return out;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1", "fig2-quartic", "fig2-bananas", "fig2-anisotropic"}; }

std::vector<ExperimentSpec> preset_specs(const std::string& name, std::uint64_t seed) {
  ExperimentSpec base;
  base.init.count = 500;
  base.init.seed = seed;
  base.init.covariance = Matrix::Identity(2, 2);
  const auto all = {SamplerKind::Asvgd, SamplerKind::Svgd, SamplerKind::Ula, SamplerKind::Mala, SamplerKind::Uld};

  if (name == "fig1") {
    base.target.mean = Vector::Zero(2);
    base.target.precision = mat2(3, -2, -2, 3);
    base.init.mean = vec2(1, 1);
    base.init.covariance = mat2(3, 2, 2, 3);
    base.kernel_name = "bilinear";
    auto specs = with_samplers(base, {SamplerKind::Asvgd, SamplerKind::Svgd, SamplerKind::Mala, SamplerKind::Uld});
    // The bilinear momentum update diverges on this target for tau = 0.1.
    specs.front().tau = 0.05;
    return specs;
  }
  if (name == "fig2-quartic") {
    base.target.name = "quartic";
    base.init.mean = vec2(0, 5);
    auto specs = with_samplers(base, all);
    // ULA overflows within ten steps at tau = 0.1 from this start.
    specs[2].tau = 0.01;
    return specs;
  }
  if (name == "fig2-bananas") {
    base.target.name = "double-bananas";
    base.init.mean = vec2(0, 7);
    base.damping = ConstantDamping{0.985};
    return with_samplers(base, all);
  }
  if (name == "fig2-anisotropic") {
    base.target.mean = vec2(1, 1);
    base.target.covariance = mat2(10, 0, 0, 0.05);
    base.init.mean = vec2(0, 0);
    return with_samplers(base, all);
  }
  throw UsageError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct RawOptions {
  std::string sampler;
  std::string target;
  std::vector<double> target_mean;
  std::vector<double> target_cov;
  std::vector<double> target_precision;
  std::string kernel = "gaussian";
  std::vector<double> matrix_a;
  double sigma = 0.1;
  double tau = 0.1;
  double eps = 0.1;
  long long n = 500;
  long long steps = 1000;
  std::uint64_t seed = 1;
  std::string damping = "restart";
  double beta = 0.985;
  double friction = 1.0;
  std::vector<double> init_mean;
  std::vector<double> init_cov;
  std::string trace_lag = "mixed";
  std::string restart_rule = "energy-increase";
  std::string gaussian_interaction = "derived";
  std::string out = "out";
  long long snapshot_every = 100;
  long long metric_every = 10;
  long long trajectories = 50;
  bool trajectory_all = false;
  int kl_grid = 400;
};

void add_experiment_options(CLI::App& app, RawOptions& o, bool with_sampler) {
  if (with_sampler)
    app.add_option("--sampler", o.sampler, "asvgd, svgd, ula, mala or uld")
        ->required()
        ->check(CLI::IsMember({"asvgd", "svgd", "ula", "mala", "uld"}));
  app.add_option("--target", o.target, "gaussian, quartic or double-bananas")
      ->required()
      ->check(CLI::IsMember({"gaussian", "quartic", "double-bananas"}));
  app.add_option("--target-mean", o.target_mean, "Gaussian target mean")->delimiter(',');
  app.add_option("--target-cov", o.target_cov, "Gaussian target covariance, row-major")->delimiter(',');
  app.add_option("--target-precision", o.target_precision, "Gaussian target precision, row-major")->delimiter(',');
  app.add_option("--kernel", o.kernel, "gaussian or bilinear")->check(CLI::IsMember({"gaussian", "bilinear"}));
  app.add_option("--matrix-a", o.matrix_a, "bilinear kernel matrix A, row-major (default identity)")->delimiter(',');
  app.add_option("--sigma", o.sigma, "Gaussian kernel bandwidth sigma")->capture_default_str();
  app.add_option("--tau", o.tau, "step size")->capture_default_str();
  app.add_option("--eps", o.eps, "regularisation of the kernel solve")->capture_default_str();
  app.add_option("--n", o.n, "number of particles")->capture_default_str();
  app.add_option("--steps", o.steps, "number of steps")->capture_default_str();
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--damping", o.damping, "restart or constant")->check(CLI::IsMember({"restart", "constant"}));
  app.add_option("--beta", o.beta, "constant damping value")->capture_default_str();
  app.add_option("--friction", o.friction, "ULD friction")->capture_default_str();
  app.add_option("--init-mean", o.init_mean, "initial Gaussian mean (default zero)")->delimiter(',');
  app.add_option("--init-cov", o.init_cov, "initial Gaussian covariance, row-major (default identity)")->delimiter(',');
  app.add_option("--trace-lag", o.trace_lag, "bilinear trace term: mixed or current")
      ->check(CLI::IsMember({"mixed", "current"}));
  app.add_option("--restart-rule", o.restart_rule, "gradient restart sign: energy-increase or as-printed")
      ->check(CLI::IsMember({"energy-increase", "as-printed"}));
  app.add_option("--gaussian-interaction", o.gaussian_interaction, "derived or as-printed")
      ->check(CLI::IsMember({"derived", "as-printed"}));
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--snapshot-every", o.snapshot_every, "particle snapshot cadence")->capture_default_str();
  app.add_option("--metric-every", o.metric_every, "metrics cadence")->capture_default_str();
  app.add_option("--trajectories", o.trajectories, "number of tracked particles")->capture_default_str();
  app.add_flag("--trajectory-all", o.trajectory_all, "track every particle");
  app.add_option("--kl-grid", o.kl_grid, "quadrature points per dimension for log Z")->capture_default_str();
}

Matrix square(const std::vector<double>& values, Index d, const std::string& flag) {
  if (static_cast<Index>(values.size()) != d * d)
    throw UsageError(flag + " needs " + std::to_string(d * d) + " values (row-major " + std::to_string(d) + "x" +
                     std::to_string(d) + ")");
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = values[static_cast<std::size_t>(i * d + j)];
  return m;
}

Vector vector_of(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Index square_side(std::size_t size) {
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(size))));
  return side * side == static_cast<Index>(size) ? side : -1;
}

ExperimentSpec to_spec(const RawOptions& o, const std::string& sampler) {
  ExperimentSpec s;
  s.sampler = parse_sampler_kind(sampler);

  s.target.name = o.target;
  Index d = 2;
  if (o.target == "gaussian") {
    if (!o.target_cov.empty() && !o.target_precision.empty())
      throw UsageError("--target-cov and --target-precision are mutually exclusive");
    if (!o.target_mean.empty()) {
      d = static_cast<Index>(o.target_mean.size());
    } else if (!o.target_cov.empty() || !o.target_precision.empty()) {
      d = square_side(o.target_cov.empty() ? o.target_precision.size() : o.target_cov.size());
      if (d < 1) throw UsageError("gaussian target matrix must have a square number of entries");
    }
    s.target.mean = o.target_mean.empty() ? Vector(Vector::Zero(d)) : vector_of(o.target_mean);
    if (!o.target_cov.empty()) s.target.covariance = square(o.target_cov, d, "--target-cov");
    if (!o.target_precision.empty()) s.target.precision = square(o.target_precision, d, "--target-precision");
  } else if (!o.target_mean.empty() || !o.target_cov.empty() || !o.target_precision.empty()) {
    throw UsageError("--target-mean/--target-cov/--target-precision only apply to the gaussian target");
  }

  s.kernel_name = o.kernel;
  s.sigma = o.sigma;
  if (!o.matrix_a.empty()) s.matrix_a = square(o.matrix_a, d, "--matrix-a");

  if (o.n < 1) throw UsageError("--n must be at least 1");
  if (o.steps < 0) throw UsageError("--steps must be non-negative");
  if (o.snapshot_every < 1 || o.metric_every < 1) throw UsageError("cadences must be at least 1");
  if (o.trajectories < 0) throw UsageError("--trajectories must be non-negative");

  s.init.mean = o.init_mean.empty() ? Vector(Vector::Zero(d)) : vector_of(o.init_mean);
  s.init.covariance = o.init_cov.empty() ? Matrix(Matrix::Identity(d, d)) : square(o.init_cov, d, "--init-cov");
  s.init.count = static_cast<Index>(o.n);
  s.init.seed = o.seed;

  s.tau = o.tau;
  s.eps = o.eps;
  s.steps = static_cast<std::size_t>(o.steps);
  if (o.damping == "constant") {
    s.damping = ConstantDamping{o.beta};
  } else {
    s.damping = AdaptiveRestart{};
  }
  s.friction = o.friction;
  s.trace_lag = o.trace_lag == "current" ? BilinearTraceLag::Current : BilinearTraceLag::Mixed;
  s.restart_rule =
      o.restart_rule == "as-printed" ? GradientRestartRule::AsPrinted : GradientRestartRule::EnergyIncrease;
  s.gaussian_interaction =
      o.gaussian_interaction == "as-printed" ? GaussianInteraction::AsPrinted : GaussianInteraction::Derived;

  s.out_dir = o.out;
  s.snapshot_every = static_cast<std::size_t>(o.snapshot_every);
  s.metric_every = static_cast<std::size_t>(o.metric_every);
  s.trajectory_count = static_cast<std::size_t>(o.trajectories);
  s.trajectory_all = o.trajectory_all;
  s.kl_grid = o.kl_grid;
  s.validate();
  return s;
}

void assign_compare_dirs(std::vector<ExperimentSpec>& specs, const fs::path& out) {
  const auto labels = compare_labels(specs);
  for (std::size_t i = 0; i < specs.size(); ++i) specs[i].out_dir = out / labels[i];
}

}  // namespace

CliRequest parse_cli(int argc, const char* const* argv) {
  CLI::App app{"Accelerated Stein variational gradient descent and baseline particle samplers", "steinflow"};
  app.set_config("--config", "", "replay a run manifest (key=value file with a [run] section)");
  app.require_subcommand(1);

  RawOptions run_opts;
  auto* run = app.add_subcommand("run", "run one sampler");
  add_experiment_options(*run, run_opts, true);

  RawOptions cmp_opts;
  std::vector<std::string> samplers;
  std::vector<std::string> tau_overrides;
  auto* cmp = app.add_subcommand("compare", "run several samplers from a shared initial ensemble");
  add_experiment_options(*cmp, cmp_opts, false);
  cmp->add_option("--samplers", samplers, "comma-separated sampler list")->required()->delimiter(',');
  cmp->add_option("--sampler-tau", tau_overrides, "per-sampler step size, e.g. ula=0.01");

  std::string preset_name;
  std::string preset_out;
  std::uint64_t preset_seed = 1;
  long long preset_steps = -1;
  long long preset_n = -1;
  auto* preset = app.add_subcommand("preset", "run a named experiment set");
  preset->add_option("name", preset_name, "fig1, fig2-quartic, fig2-bananas or fig2-anisotropic")
      ->required()
      ->check(CLI::IsMember(preset_names()));
  preset->add_option("--out", preset_out, "output directory (default out/<name>)");
  preset->add_option("--seed", preset_seed, "random seed")->capture_default_str();
  preset->add_option("--steps", preset_steps, "override the step count");
  preset->add_option("--n", preset_n, "override the particle count");

  // a bare --config replays as `run`
  std::vector<const char*> args(argv, argv + argc);
  bool has_config = false;
  bool has_subcommand = false;
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" || a.starts_with("--config=")) has_config = true;
    if (a == "run" || a == "compare" || a == "preset") has_subcommand = true;
  }
  if (has_config && !has_subcommand) args.push_back("run");

  try {
    app.parse(static_cast<int>(args.size()), args.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream out;
    std::ostringstream err;
    app.exit(e, out, err);
    if (e.get_exit_code() == 0) return CliRequest{CliRequest::Mode::Help, {}, {}, out.str()};
    throw UsageError(err.str() + out.str());
  }

  CliRequest req;
  if (run->parsed()) {
    req.mode = CliRequest::Mode::Run;
    req.specs.push_back(to_spec(run_opts, run_opts.sampler));
    req.out_dir = req.specs.back().out_dir;
    return req;
  }

  req.mode = CliRequest::Mode::Compare;
  if (cmp->parsed()) {
    std::map<std::string, double> taus;
    for (const auto& entry : tau_overrides) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw UsageError("--sampler-tau expects name=value, got '" + entry + "'");
      const std::string name = entry.substr(0, eq);
      parse_sampler_kind(name);
      try {
        std::size_t used = 0;
        taus[name] = std::stod(entry.substr(eq + 1), &used);
        if (used != entry.size() - eq - 1) throw std::invalid_argument(entry);
      } catch (const std::exception&) {
        throw UsageError("--sampler-tau: cannot parse '" + entry + "'");
      }
    }
    for (const auto& name : samplers) {
      RawOptions o = cmp_opts;
      if (auto it = taus.find(name); it != taus.end()) o.tau = it->second;
      req.specs.push_back(to_spec(o, name));
    }
    req.out_dir = cmp_opts.out;
  } else {
    req.specs = preset_specs(preset_name, preset_seed);
    for (auto& s : req.specs) {
      if (preset_steps >= 0) s.steps = static_cast<std::size_t>(preset_steps);
      if (preset_n >= 1) s.init.count = static_cast<Index>(preset_n);
      if (preset_n == 0 || preset_n < -1) throw UsageError("--n must be at least 1");
    }
    req.out_dir = preset_out.empty() ? fs::path("out") / preset_name : fs::path(preset_out);
  }
  assign_compare_dirs(req.specs, req.out_dir);
  return req;
}

int cli_main(int argc, const char* const* argv) {
  try {
    const CliRequest req = parse_cli(argc, argv);
    switch (req.mode) {
      case CliRequest::Mode::Help:
        std::cout << req.message;
        return 0;
      case CliRequest::Mode::Run: {
        const auto result = run_experiment(req.specs.front());
        std::cout << "wrote " << req.out_dir.string() << " (final kl "
                  << format_double(result.metrics.back().kl_estimate) << ")\n";
        return 0;
      }
      case CliRequest::Mode::Compare: {
        const auto result = compare(req.specs, req.out_dir);
        for (std::size_t i = 0; i < result.labels.size(); ++i)
          std::cout << result.labels[i] << ": final kl " << format_double(result.runs[i].metrics.back().kl_estimate)
                    << '\n';
        std::cout << "wrote " << (req.out_dir / "kl_compare.csv").string() << '\n';
        return 0;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort at " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace steinflow
