#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "steinflow/harness.hpp"

using namespace steinflow;
namespace fs = std::filesystem;

namespace {

CliRequest parse(std::vector<std::string> args) {
  args.insert(args.begin(), "steinflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_cli(static_cast<int>(argv.size()), argv.data());
}

int run_main(std::vector<std::string> args) {
  args.insert(args.begin(), "steinflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("steinflow_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ExperimentSpec small_spec(const fs::path& out) {
  ExperimentSpec s;
  s.target.mean = Vector::Zero(2);
  s.target.precision = mat2(3, -2, -2, 3);
  s.init.mean = Vector::Ones(2);
  s.init.covariance = mat2(3, 2, 2, 3);
  s.init.count = 30;
  s.init.seed = 5;
  s.steps = 25;
  s.snapshot_every = 10;
  s.metric_every = 5;
  s.trajectory_count = 4;
  s.kl_grid = 64;
  s.out_dir = out;
  return s;
}

}  // namespace

TEST_CASE("cli defaults follow the standard protocol") {
  const CliRequest req = parse({"run", "--sampler", "asvgd", "--target", "quartic", "--kernel", "gaussian", "--seed", "7"});
  REQUIRE(req.mode == CliRequest::Mode::Run);
  REQUIRE(req.specs.size() == 1);
  const ExperimentSpec& s = req.specs[0];
  CHECK(s.sampler == SamplerKind::Asvgd);
  CHECK(s.target.name == "quartic");
  CHECK(s.init.count == 500);
  CHECK(s.steps == 1000);
  CHECK(s.tau == 0.1);
  CHECK(s.sigma == 0.1);
  CHECK(s.eps == 0.1);
  CHECK(s.init.seed == 7);
  CHECK(std::holds_alternative<AdaptiveRestart>(s.damping));
  CHECK(std::get<GaussianKernel>(s.kernel()).sigma2 == doctest::Approx(0.01));
  CHECK(s.init.mean == Vector::Zero(2));
  CHECK(s.init.covariance == Matrix::Identity(2, 2));
  CHECK(s.snapshot_every == 100);
  CHECK(s.metric_every == 10);
  CHECK(s.trajectory_count == 50);
}

TEST_CASE("cli constant damping") {
  const CliRequest req =
      parse({"run", "--sampler", "asvgd", "--target", "double-bananas", "--beta", "0.985", "--damping", "constant"});
  const auto* c = std::get_if<ConstantDamping>(&req.specs[0].damping);
  REQUIRE(c != nullptr);
  CHECK(c->beta == 0.985);
}

TEST_CASE("cli rejects bad input") {
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--tau", "-1"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--tau", "abc"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--bogus", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--target", "quartic"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "hmc", "--target", "quartic"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "nope"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--eps", "-0.5"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--damping", "constant", "--beta", "1.5"}),
                  UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "uld", "--target", "quartic", "--friction", "0"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--n", "0"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--init-mean", "1,2,3"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--init-cov", "1,2,2,1"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--kernel", "bilinear", "--matrix-a",
                         "1,0,0"}),
                  UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "gaussian", "--target-cov", "1,0,0,1",
                         "--target-precision", "1,0,0,1"}),
                  UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--target-mean", "1,1"}), UsageError);
  CHECK_THROWS_AS(parse({"run", "--sampler", "asvgd", "--target", "quartic", "--kl-grid", "8"}), UsageError);
  CHECK_THROWS_AS(parse({}), UsageError);
  CHECK(run_main({"run", "--sampler", "asvgd", "--target", "quartic", "--tau", "-1"}) == 1);
}

TEST_CASE("cli help") {
  const CliRequest req = parse({"--help"});
  CHECK(req.mode == CliRequest::Mode::Help);
  CHECK(req.message.find("run") != std::string::npos);
  CHECK(run_main({"run", "--help"}) == 0);
}

TEST_CASE("cli gaussian targets") {
  const CliRequest cov = parse({"run", "--sampler", "svgd", "--target", "gaussian", "--target-mean", "1,1",
                                "--target-cov", "10,0,0,0.05", "--init-mean", "0,0"});
  const ExperimentSpec& s = cov.specs[0];
  REQUIRE(s.target.covariance.has_value());
  CHECK(*s.target.covariance == mat2(10, 0, 0, 0.05));
  CHECK(s.target.build().gradient(Vector::Ones(2) * 2).isApprox(Vector(Eigen::Vector2d(0.1, 20)), 1e-14));

  const CliRequest prec =
      parse({"run", "--sampler", "asvgd", "--target", "gaussian", "--target-precision", "3,-2,-2,3"});
  CHECK(prec.specs[0].target.mean == Vector::Zero(2));
  CHECK(*prec.specs[0].target.precision == mat2(3, -2, -2, 3));

  const CliRequest three = parse({"run", "--sampler", "asvgd", "--target", "gaussian", "--target-mean", "0,0,0"});
  CHECK(three.specs[0].init.mean.size() == 3);
  CHECK(three.specs[0].target.build().dim == 3);

  const CliRequest bil = parse({"run", "--sampler", "asvgd", "--target", "gaussian", "--kernel", "bilinear",
                                "--matrix-a", "2,0,0,3"});
  CHECK(std::get<BilinearKernel>(bil.specs[0].kernel()).a == mat2(2, 0, 0, 3));
  const CliRequest bil_default = parse({"run", "--sampler", "asvgd", "--target", "gaussian", "--kernel", "bilinear"});
  CHECK(std::get<BilinearKernel>(bil_default.specs[0].kernel()).a == Matrix::Identity(2, 2));
}

TEST_CASE("cli compare") {
  const CliRequest req = parse({"compare", "--samplers", "asvgd,ula,asvgd", "--target", "quartic", "--sampler-tau",
                                "ula=0.01", "--out", "cmp"});
  REQUIRE(req.mode == CliRequest::Mode::Compare);
  REQUIRE(req.specs.size() == 3);
  CHECK(req.specs[1].tau == 0.01);
  CHECK(req.specs[0].tau == 0.1);
  CHECK(compare_labels(req.specs) == std::vector<std::string>{"asvgd", "ula", "asvgd_2"});
  CHECK(req.specs[2].out_dir == fs::path("cmp") / "asvgd_2");
  CHECK(req.out_dir == fs::path("cmp"));
  CHECK_THROWS_AS(parse({"compare", "--samplers", "asvgd", "--target", "quartic", "--sampler-tau", "ula"}), UsageError);
  CHECK_THROWS_AS(parse({"compare", "--samplers", "asvgd", "--target", "quartic", "--sampler-tau", "hmc=1"}),
                  UsageError);
  CHECK_THROWS_AS(parse({"compare", "--samplers", "asvgd", "--target", "quartic", "--sampler-tau", "ula=x"}),
                  UsageError);
}

TEST_CASE("presets") {
  const auto fig1 = preset_specs("fig1", 3);
  REQUIRE(fig1.size() == 4);
  CHECK(fig1[0].sampler == SamplerKind::Asvgd);
  CHECK(fig1[1].sampler == SamplerKind::Svgd);
  CHECK(fig1[2].sampler == SamplerKind::Mala);
  CHECK(fig1[3].sampler == SamplerKind::Uld);
  for (const auto& s : fig1) {
    CHECK(*s.target.precision == mat2(3, -2, -2, 3));
    CHECK(s.init.mean == Vector::Ones(2));
    CHECK(s.init.covariance == mat2(3, 2, 2, 3));
    CHECK(s.kernel_name == "bilinear");
    CHECK(s.init.count == 500);
    CHECK(s.init.seed == 3);
    CHECK(s.steps == 1000);
    CHECK_NOTHROW(s.validate());
  }

  const auto quartic = preset_specs("fig2-quartic", 1);
  CHECK(quartic.size() == 5);
  CHECK(quartic[0].target.name == "quartic");
  CHECK(quartic[0].init.mean == Vector(Eigen::Vector2d(0, 5)));
  CHECK(quartic[0].init.covariance == Matrix::Identity(2, 2));
  CHECK(quartic[0].sigma == 0.1);
  CHECK(quartic[2].sampler == SamplerKind::Ula);
  CHECK(quartic[2].tau == 0.01);
  CHECK(quartic[0].tau == 0.1);

  const auto bananas = preset_specs("fig2-bananas", 1);
  CHECK(bananas[0].init.mean == Vector(Eigen::Vector2d(0, 7)));
  CHECK(std::get<ConstantDamping>(bananas[0].damping).beta == 0.985);

  const auto aniso = preset_specs("fig2-anisotropic", 1);
  CHECK(*aniso[0].target.covariance == mat2(10, 0, 0, 0.05));
  CHECK(aniso[0].target.mean == Vector::Ones(2));
  CHECK(aniso[0].init.mean == Vector::Zero(2));

  CHECK_THROWS_AS(preset_specs("fig3", 1), UsageError);

  const CliRequest req = parse({"preset", "fig2-quartic", "--steps", "3", "--n", "20", "--out", "p"});
  CHECK(req.specs.size() == 5);
  CHECK(req.specs[4].steps == 3);
  CHECK(req.specs[4].init.count == 20);
  CHECK(req.specs[4].out_dir == fs::path("p") / "uld");
}

TEST_CASE("run_experiment writes its outputs") {
  TempDir dir("run");
  const ExperimentSpec spec = small_spec(dir.path);
  const ExperimentResult r = run_experiment(spec);

  for (const char* f : {"manifest.txt", "metrics.csv", "particles_init.csv", "particles_final.csv", "particles_10.csv",
                        "particles_20.csv"})
    CHECK(fs::exists(dir.path / f));
  CHECK_FALSE(fs::exists(dir.path / "particles_25.csv"));
  int trajectories = 0;
  for (const auto& entry : fs::directory_iterator(dir.path))
    trajectories += entry.path().filename().string().starts_with("trajectory_");
  CHECK(trajectories == 4);

  const auto traj = lines(dir.path / "trajectory_0.csv");
  CHECK(traj.front() == "step,x0,x1");
  CHECK(traj.size() == 1 + 26);

  const auto metric_lines = lines(dir.path / "metrics.csv");
  CHECK(metric_lines.front() == "step,kl,mean_0,mean_1,cov_trace,restart_fraction,alpha_mean");
  CHECK(metric_lines.size() == 1 + 6);
  CHECK(metric_lines[1].starts_with("0,"));
  CHECK(metric_lines.back().starts_with("25,"));
  CHECK(r.metrics.size() == 6);

  CHECK(read_particles_csv(dir.path / "particles_final.csv") == r.final_state.positions);
  CHECK(read_particles_csv(dir.path / "particles_init.csv") == init_ensemble(spec.init).positions);
  CHECK(slurp(dir.path / "manifest.txt").starts_with("[run]\n"));
}

TEST_CASE("zero steps write identical init and final snapshots") {
  TempDir dir("zero");
  ExperimentSpec spec = small_spec(dir.path);
  spec.steps = 0;
  run_experiment(spec);
  CHECK(slurp(dir.path / "particles_init.csv") == slurp(dir.path / "particles_final.csv"));
  CHECK(lines(dir.path / "metrics.csv").size() == 2);
}

TEST_CASE("manifest replay reproduces metrics bit for bit") {
  TempDir dir("replay");
  for (auto kind : {SamplerKind::Asvgd, SamplerKind::Mala}) {
    ExperimentSpec spec = small_spec(dir.path / "first");
    spec.sampler = kind;
    spec.damping = ConstantDamping{0.95};
    spec.trajectory_all = true;
    spec.target.precision.reset();
    spec.target.covariance = mat2(2, 0.3, 0.3, 1);
    run_experiment(spec);

    const std::string manifest = (dir.path / "first" / "manifest.txt").string();
    const std::string second = (dir.path / "second").string();
    const CliRequest req = parse({"--config", manifest, "run", "--out", second});
    REQUIRE(req.specs.size() == 1);
    ExperimentSpec replay = req.specs[0];
    CHECK(replay.target == spec.target);
    CHECK(manifest_entries(replay).size() == manifest_entries(spec).size());
    run_experiment(replay);
    CHECK(slurp(dir.path / "first" / "metrics.csv") == slurp(dir.path / "second" / "metrics.csv"));
    CHECK(slurp(dir.path / "first" / "particles_final.csv") == slurp(dir.path / "second" / "particles_final.csv"));

    replay.out_dir = spec.out_dir;
    CHECK(manifest_entries(replay) == manifest_entries(spec));
  }
}

TEST_CASE("bare --config replays as run") {
  TempDir dir("bare_config");
  ExperimentSpec spec = small_spec(dir.path / "first");
  std::filesystem::create_directories(dir.path);
  write_manifest(dir.path / "manifest.txt", spec);
  const CliRequest req = parse({"--config", (dir.path / "manifest.txt").string()});
  CHECK(req.mode == CliRequest::Mode::Run);
  REQUIRE(req.specs.size() == 1);
  CHECK(manifest_entries(req.specs[0]) == manifest_entries(spec));
}

TEST_CASE("compare shares the initial ensemble and writes one column per sampler") {
  TempDir dir("compare");
  ExperimentSpec a = small_spec(dir.path / "asvgd");
  ExperimentSpec b = a;
  b.sampler = SamplerKind::Svgd;
  b.out_dir = dir.path / "svgd";
  ExperimentSpec c = a;
  c.out_dir = dir.path / "asvgd_2";

  const CompareResult r = compare({a, b, c}, dir.path);
  const auto table = lines(dir.path / "kl_compare.csv");
  CHECK(table.front() == "step,asvgd,svgd,asvgd_2");
  CHECK(table.size() == 1 + 6);
  for (std::size_t i = 1; i < table.size(); ++i) {
    std::stringstream row(table[i]);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    REQUIRE(cells.size() == 4);
    CHECK(cells[1] == cells[3]);
  }
  CHECK(slurp(dir.path / "asvgd" / "particles_init.csv") == slurp(dir.path / "svgd" / "particles_init.csv"));
  CHECK(r.runs[0].final_state.positions == r.runs[2].final_state.positions);

  TempDir single("compare_single");
  compare({small_spec(single.path / "asvgd")}, single.path);
  CHECK(lines(single.path / "kl_compare.csv").front() == "step,asvgd");

  ExperimentSpec other = b;
  other.target.name = "quartic";
  other.target.precision.reset();
  CHECK_THROWS_AS(compare({a, other}, dir.path), UsageError);
  ExperimentSpec fewer = b;
  fewer.init.count = 10;
  CHECK_THROWS_AS(compare({a, fewer}, dir.path), UsageError);
  CHECK_THROWS_AS(compare({}, dir.path), UsageError);
}

TEST_CASE("cli exit codes") {
  TempDir dir("exit");
  const std::string out = (dir.path / "ok").string();
  CHECK(run_main({"run", "--sampler", "svgd", "--target", "quartic", "--n", "10", "--steps", "5", "--out", out}) == 0);
  CHECK(fs::exists(dir.path / "ok" / "metrics.csv"));

  CHECK(run_main({"run", "--sampler", "ula", "--target", "gaussian", "--target-precision", "1e6,0,0,1e6", "--tau",
                  "10", "--n", "4", "--steps", "50", "--out", (dir.path / "boom").string()}) == 2);

  {
    std::ofstream blocker(dir.path / "file");
  }
  CHECK(run_main({"run", "--sampler", "svgd", "--target", "quartic", "--n", "4", "--steps", "1", "--out",
                  (dir.path / "file" / "sub").string()}) == 3);
}
