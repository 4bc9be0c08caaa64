// chita: generate problem files, prune, and run oracle suites.
//
// Exit codes: 0 success, 2 configuration error, 3 file-format error,
// 4 infeasible problem, 5 verification failure.

#include "chita/baselines.hpp"
#include "chita/io.hpp"
#include "chita/multistage.hpp"
#include "chita/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

namespace fs = std::filesystem;
using namespace chita;

namespace {

enum Exit { kOk = 0, kConfig = 2, kFormat = 3, kInfeasible = 4, kVerify = 5 };

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntheticOptions {
  Index n = 0;
  Index p = 0;
  std::uint64_t seed = 0;
  double decades = 0.0;
  std::string dtype = "f64";
  fs::path out;
};

struct ToyOptions {
  ToyTaskOptions task;
  Index n = 128;
  Index m = 1;
  std::uint64_t seed = 0;
  fs::path out;
};

struct PruneOptions {
  fs::path config, matrix, wbar, out, csv, layers, dataset;
};

io::DType parse_dtype(const std::string& s) {
  if (s == "f64") return io::DType::float64;
  if (s == "f32") return io::DType::float32;
  throw io::ConfigError("unknown dtype '" + s + "' (expected f32 or f64)");
}

// A(i, j) = s_j·N(0, 1) with log10 s_j uniform on [−decades/2, decades/2].
int gen_synthetic(const SyntheticOptions& o) {
  if (o.n < 1 || o.p < 1) throw io::ConfigError("--n and --p must be >= 1");
  if (!(o.decades >= 0.0)) throw io::ConfigError("--scale-decades must be >= 0");
  const io::DType dtype = parse_dtype(o.dtype);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd A(o.n, o.p);
  for (Index j = 0; j < o.p; ++j) {
    const double s = std::pow(10.0, o.decades * unit(rng));
    for (Index i = 0; i < o.n; ++i) A(i, j) = s * normal(rng);
  }
  Vector wbar(o.p);
  for (Index j = 0; j < o.p; ++j) wbar[j] = normal(rng);

  fs::create_directories(o.out);
  io::write_matrix(o.out / "A.mtx", A, dtype);
  io::write_vector(o.out / "wbar.vec", wbar, dtype);
  io::write_layer_map(o.out / "layers.json", {{"params", o.p}});
  std::printf("wrote %s (n=%lld, p=%lld)\n", o.out.c_str(), static_cast<long long>(o.n),
              static_cast<long long>(o.p));
  return kOk;
}

// The dataset snapshot is a samples × (input_dim + 1) matrix whose last
// column holds the class label.
int gen_toy(ToyOptions o) {
  o.task.data.seed = o.seed;
  o.task.train.seed = o.seed;
  o.task.init_seed = o.seed;
  if (o.n < 1 || o.m < 1) throw io::ConfigError("--n and --m must be >= 1");
  if (o.n * o.m > o.task.data.samples) {
    throw io::ConfigError("--n times --m exceeds --samples");
  }
  const ToyTask task = make_toy_task(o.task);
  const FisherBuild fisher = build_fisher_matrix(task.model, task.wbar, o.n, o.m, o.seed);

  const Dataset& d = task.model.data();
  Eigen::MatrixXd snapshot(d.size(), d.input_dim() + 1);
  snapshot.leftCols(d.input_dim()) = d.features.transpose();
  for (Index i = 0; i < d.size(); ++i) {
    snapshot(i, d.input_dim()) = d.labels[static_cast<std::size_t>(i)];
  }

  fs::create_directories(o.out);
  io::write_matrix(o.out / "A.mtx", Eigen::MatrixXd(fisher.A.view()));
  io::write_vector(o.out / "wbar.vec", task.wbar);
  io::write_layer_map(o.out / "layers.json", task.model.layer_map());
  io::write_matrix(o.out / "dataset.mtx", snapshot);
  std::printf("wrote %s (n=%lld, p=%lld, dense loss %.6g)\n", o.out.c_str(),
              static_cast<long long>(o.n), static_cast<long long>(task.wbar.size()),
              true_loss(task.model, task.wbar));
  return kOk;
}

Index layer_length(const std::vector<LayerSpec>& layers, const std::string& name) {
  for (const auto& l : layers) {
    if (l.name == name) return l.length;
  }
  throw io::FormatError("layer map has no '" + name + "' entry", 0);
}

ToyMLP load_model(const fs::path& dataset, const std::vector<LayerSpec>& layers, Index p) {
  const io::MatrixFile snap = io::read_matrix(dataset);
  const Index cols = snap.data.cols();
  if (cols < 2) throw io::FormatError("dataset needs at least one feature column", 24);
  const Index hidden = layer_length(layers, "fc1.bias");
  const Index classes = layer_length(layers, "fc2.bias");
  Dataset d;
  d.classes = static_cast<int>(classes);
  d.features = snap.data.leftCols(cols - 1).transpose();
  for (Index i = 0; i < snap.data.rows(); ++i) {
    const double y = snap.data(i, cols - 1);
    if (y != std::floor(y) || y < 0 || y >= static_cast<double>(classes)) {
      throw io::FormatError("dataset label out of range in row " + std::to_string(i), 32);
    }
    d.labels.push_back(static_cast<int>(y));
  }
  ToyMLP model(std::move(d), hidden);
  if (model.param_count() != p) {
    throw io::FormatError("dataset and layer map imply " + std::to_string(model.param_count()) +
                              " parameters, matrix has " + std::to_string(p), 0);
  }
  return model;
}

SparseSolution run_solver(const io::RunConfig& cfg, const ProblemInstance& inst,
                          const PruneOptions& o, const std::vector<Index>& layer_sizes) {
  const Index p = inst.p(), k = inst.k();
  const Vector& wbar = inst.wbar();
  SolverConfig sc;
  sc.t_ht = cfg.t_ht;
  sc.t_cd = cfg.t_cd;
  sc.gamma = cfg.gamma;
  BacksolveOptions bso;
  bso.active_mult = cfg.active_mult;

  const std::string& s = cfg.solver;
  if (s == "iht-cd") return iht_cd(inst, wbar, k, sc);
  if (s == "chita-cd") return chita_cd(inst, wbar, k, sc, init_active_set(wbar, k, cfg.active_mult));
  if (s == "chita-bso") return chita_bso(inst, wbar, k, sc, bso);
  if (s == "magnitude") return magnitude_prune(inst, k);
  if (s == "obd") return obd_prune(inst, k);
  // Same number of HT steps as the outer-iteration cap of the searched solvers.
  if (s == "iht-constant") return iht_constant_step(inst, wbar, k, cfg.t_ht * sc.max_outer);
  if (s == "blockwise") {
    const BlockPartition part =
        allocate_sparsity(wbar, k, partition_layers(layer_sizes, cfg.block_size));
    BlockwiseOptions opts;
    opts.solver = sc;
    opts.backsolve = bso;
    return solve_blockwise(inst.A(), wbar, inst.lambda(), inst.alpha(), part, opts);
  }
  if (s == "multistage") {
    if (o.dataset.empty() || o.layers.empty()) {
      throw io::ConfigError("solver 'multistage' needs --dataset and --layers");
    }
    const ToyMLP model = load_model(o.dataset, io::read_layer_map(o.layers), p);
    const double tau = cfg.sparsity ? *cfg.sparsity
                                    : 1.0 - static_cast<double>(k) / static_cast<double>(p);
    const auto kind = *parse_schedule_kind(cfg.schedule);
    if (kind != ScheduleKind::constant && cfg.tau_first > tau) {
      throw io::ConfigError("config key 'tau_first' exceeds the target sparsity");
    }
    MultiStageOptions ms;
    ms.n = cfg.n;
    ms.m = cfg.m;
    ms.lambda = cfg.lambda;
    ms.solver_config = sc;
    ms.active_mult = cfg.active_mult;
    ms.block_size = cfg.block_size;
    ms.layer_sizes = layer_sizes;
    ms.seed = cfg.seed;
    MultiStageResult r = chita_pp(model, wbar, make_schedule(kind, cfg.tau_first, tau, cfg.stages), ms);
    SparseSolution out = SparseSolution::from_weights(inst, r.solution.weights);
    for (const StageRecord& st : r.stages) {
      out.iterations += st.solution.iterations;
      out.trace.push_back(objective(inst, st.solution.weights));
    }
    return out;
  }
  throw io::ConfigError("config key 'solver' has unknown value '" + s + "'");
}

int prune(const PruneOptions& o) {
  const io::RunConfig cfg = io::read_config(o.config);
  const io::MatrixFile A = io::read_matrix(o.matrix);
  const io::VectorFile wbar = io::read_vector(o.wbar);
  const Index p = A.data.cols();
  if (wbar.data.size() != p) {
    throw io::FormatError("wbar has length " + std::to_string(wbar.data.size()) +
                              " but the matrix has " + std::to_string(p) + " columns", 16);
  }
  std::vector<Index> layer_sizes{p};
  if (!o.layers.empty()) {
    layer_sizes.clear();
    Index total = 0;
    for (const auto& l : io::read_layer_map(o.layers)) {
      layer_sizes.push_back(l.length);
      total += l.length;
    }
    if (total != p) {
      throw io::FormatError("layer lengths sum to " + std::to_string(total) + ", expected " +
                                std::to_string(p), 0);
    }
  }

  const Index k = cfg.budget(p);
  if (k < 1 || k > p) {
    throw Infeasible("budget k = " + std::to_string(k) + " is outside [1, " + std::to_string(p) + "]");
  }
  const double alpha = 1.0 / static_cast<double>(cfg.m);
  const ProblemInstance inst = build_problem(GradientMatrix(A.data), wbar.data, cfg.lambda, k, alpha);
  const double q0 = objective(inst, inst.wbar());

  const auto t0 = std::chrono::steady_clock::now();
  SparseSolution sol = run_solver(cfg, inst, o, layer_sizes);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  sol.objective = objective(inst, sol.weights);
  sol.support = support_of(sol.weights);

  io::write_solution(o.out, io::SolutionFile::from_solution(sol, k, cfg.digest()));
  io::CsvRow row;
  row.solver = cfg.solver;
  row.p = p;
  row.n = inst.n();
  row.k = k;
  row.lambda = cfg.lambda;
  row.seed = cfg.seed;
  row.objective_initial = q0;
  row.objective_final = sol.objective;
  row.nnz = static_cast<Index>(sol.support.size());
  row.wall_ms = wall_ms;
  row.iterations = sol.iterations;
  if (!o.csv.empty()) io::append_csv(o.csv, row);
  std::printf("%s: k=%lld nnz=%lld Q %.10g -> %.10g (%.1f ms)\n", cfg.solver.c_str(),
              static_cast<long long>(k), static_cast<long long>(row.nnz), q0, sol.objective,
              wall_ms);
  return kOk;
}

int verify_suite(const std::string& suite, std::uint64_t seed) {
  const auto report = verify::run_suite(suite, seed);
  if (!report) throw io::ConfigError("unknown suite '" + suite + "'");
  for (const auto& prop : report->properties) {
    std::printf("%s  %s: %.6g %s %.6g\n", prop.passed ? "PASS" : "FAIL", prop.name.c_str(),
                prop.measured, prop.relation.c_str(), prop.bound);
  }
  std::printf("%s suite %s\n", suite.c_str(), report->passed() ? "passed" : "FAILED");
  return report->passed() ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order network pruning as sparse ridge regression"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Write a problem instance");
  gen->require_subcommand(1);

  SyntheticOptions syn;
  auto* gsyn = gen->add_subcommand("synthetic", "Gaussian A with scaled columns and Gaussian wbar");
  gsyn->add_option("--n", syn.n, "Rows of A")->required();
  gsyn->add_option("--p", syn.p, "Columns of A")->required();
  gsyn->add_option("--seed", syn.seed, "RNG seed");
  gsyn->add_option("--scale-decades", syn.decades,
                   "Spread of log10 column scales (0 = unscaled)");
  gsyn->add_option("--dtype", syn.dtype, "f64 or f32");
  gsyn->add_option("--out", syn.out, "Output directory")->required();

  ToyOptions toy;
  auto* gtoy = gen->add_subcommand("toy-mlp", "Train the toy network and write its Fisher rows");
  gtoy->add_option("--seed", toy.seed, "Seed for data, initialisation and training");
  gtoy->add_option("--samples", toy.task.data.samples, "Dataset size");
  gtoy->add_option("--input-dim", toy.task.data.input_dim, "Input features");
  gtoy->add_option("--hidden", toy.task.hidden, "Hidden width");
  gtoy->add_option("--classes", toy.task.data.classes, "Classes");
  gtoy->add_option("--epochs", toy.task.train.epochs, "Training epochs");
  gtoy->add_option("--lr", toy.task.train.learning_rate, "Learning rate");
  gtoy->add_option("--n", toy.n, "Fisher rows");
  gtoy->add_option("--m", toy.m, "Samples per Fisher row");
  gtoy->add_option("--out", toy.out, "Output directory")->required();

  PruneOptions pr;
  auto* prune_cmd = app.add_subcommand("prune", "Solve a pruning problem");
  prune_cmd->add_option("--config", pr.config, "Run configuration (JSON)")->required();
  prune_cmd->add_option("--matrix", pr.matrix, "Gradient matrix file")->required();
  prune_cmd->add_option("--wbar", pr.wbar, "Reference weights file")->required();
  prune_cmd->add_option("--out", pr.out, "Solution file to write")->required();
  prune_cmd->add_option("--csv", pr.csv, "CSV file to append a result row to");
  prune_cmd->add_option("--layers", pr.layers, "Layer map (JSON)");
  prune_cmd->add_option("--dataset", pr.dataset, "Dataset snapshot (multistage)");

  std::string suite;
  std::uint64_t vseed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run an oracle suite");
  verify_cmd->add_option("--suite", suite, "gradients, linesearch, woodbury or bruteforce")->required();
  verify_cmd->add_option("--seed", vseed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gsyn) return gen_synthetic(syn);
    if (*gtoy) return gen_toy(toy);
    if (*prune_cmd) return prune(pr);
    if (*verify_cmd) return verify_suite(suite, vseed);
  } catch (const io::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const io::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kFormat;
  } catch (const Infeasible& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const UnsupportedConfiguration& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kOk;
}
