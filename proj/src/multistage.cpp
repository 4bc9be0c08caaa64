#include "chita/multistage.hpp"

#include <cmath>

namespace chita {

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  if (name == "exponential") return ScheduleKind::exponential;
  if (name == "linear") return ScheduleKind::linear;
  if (name == "constant") return ScheduleKind::constant;
  return std::nullopt;
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::exponential: return "exponential";
    case ScheduleKind::linear: return "linear";
    case ScheduleKind::constant: return "constant";
  }
  return "unknown";
}

SparsitySchedule make_schedule(ScheduleKind kind, double tau_first,
                               double tau_final, int stages) {
  if (stages < 1) throw InvalidArgument("make_schedule: stages must be >= 1");
  if (!(tau_final > 0.0 && tau_final < 1.0)) {
    throw InvalidArgument("make_schedule: tau_final must lie in (0, 1)");
  }
  if (kind != ScheduleKind::constant && !(tau_first > 0.0 && tau_first <= tau_final)) {
    throw InvalidArgument("make_schedule: need 0 < tau_first <= tau_final");
  }
  SparsitySchedule s{kind, tau_first, tau_final, stages, {}};
  s.values.resize(static_cast<std::size_t>(stages), tau_final);
  if (kind == ScheduleKind::constant || stages == 1) return s;

  const double span = static_cast<double>(stages - 1);
  const double d_first = 1.0 - tau_first;
  const double d_final = 1.0 - tau_final;
  for (int t = 0; t + 1 < stages; ++t) {
    const double frac = static_cast<double>(t) / span;
    s.values[static_cast<std::size_t>(t)] =
        kind == ScheduleKind::linear
            ? tau_first + frac * (tau_final - tau_first)
            : 1.0 - d_first * std::pow(d_final / d_first, frac);
  }
  return s;
}

Index budget_for_sparsity(double tau, Index p) {
  const double kept = (1.0 - tau) * static_cast<double>(p);
  return static_cast<Index>(std::floor(kept + 1e-9));
}

std::uint64_t stage_seed(std::uint64_t seed, int stage) {
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stage);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SparseSolution solve_stage(const GradientOracle& oracle, const Vector& w,
                           Index k, const MultiStageOptions& opts,
                           std::uint64_t seed) {
  FisherBuild fisher = build_fisher_matrix(oracle, w, opts.n, opts.m, seed);
  if (opts.solver == StageSolver::chita_cd) {
    const ProblemInstance inst =
        build_problem(fisher.A, w, opts.lambda, k, fisher.alpha);
    const IndexSet active0 = init_active_set(w, k, opts.active_mult);
    return chita_cd(inst, w, k, opts.solver_config, active0);
  }
  std::vector<Index> layers = opts.layer_sizes;
  if (layers.empty()) layers.push_back(w.size());
  const BlockPartition part =
      allocate_sparsity(w, k, partition_layers(layers, opts.block_size));
  BlockwiseOptions bopts;
  bopts.solver = opts.solver_config;
  bopts.backsolve.active_mult = opts.active_mult;
  return solve_blockwise(fisher.A, w, opts.lambda, fisher.alpha, part, bopts);
}

MultiStageResult chita_pp(const GradientOracle& oracle, const Vector& wbar,
                          const SparsitySchedule& schedule,
                          const MultiStageOptions& opts) {
  if (wbar.size() != oracle.dim()) throw InvalidArgument("chita_pp: wbar length mismatch");
  if (schedule.values.empty()) throw InvalidArgument("chita_pp: empty schedule");
  const Index p = wbar.size();
  MultiStageResult out;
  Vector w = wbar;
  for (std::size_t t = 0; t < schedule.values.size(); ++t) {
    const double tau = schedule.values[t];
    const Index k = budget_for_sparsity(tau, p);
    if (k < 1) {
      throw InvalidArgument("chita_pp: stage " + std::to_string(t + 1) +
                            " has an empty budget (k = 0)");
    }
    SparseSolution s = solve_stage(oracle, w, k, opts,
                                   stage_seed(opts.seed, static_cast<int>(t + 1)));
    w = s.weights;
    out.stages.push_back({tau, k, std::move(s)});
  }
  out.solution = out.stages.back().solution;
  return out;
}

}  // namespace chita
