#pragma once

#include "chita/blockwise.hpp"
#include "chita/fisher.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace chita {

enum class ScheduleKind { exponential, linear, constant };

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

/// Non-decreasing stage sparsities τ_1 ≤ … ≤ τ_f = tau_final.
struct SparsitySchedule {
  ScheduleKind kind = ScheduleKind::exponential;
  double tau_first = 0.0;
  double tau_final = 0.0;
  int stages = 1;
  std::vector<double> values;
};

/// linear: evenly spaced sparsities.
/// exponential: densities d_t = 1 − τ_t interpolated geometrically,
///   d_t = d_1·(d_f/d_1)^((t−1)/(f−1)), so steps shrink as sparsity grows.
/// constant: every stage at tau_final.
SparsitySchedule make_schedule(ScheduleKind kind, double tau_first,
                               double tau_final, int stages);

/// ⌊(1−τ)p⌋, tolerant of τ carrying representation error.
Index budget_for_sparsity(double tau, Index p);

enum class StageSolver { chita_cd, blockwise };

struct MultiStageOptions {
  /// Fisher rows per stage and samples per row.
  Index n = 128;
  Index m = 1;
  double lambda = 1e-3;
  StageSolver solver = StageSolver::chita_cd;
  SolverConfig solver_config{};
  double active_mult = 2.0;
  /// Used by the blockwise stage solver.
  Index block_size = 10000;
  std::vector<Index> layer_sizes;
  std::uint64_t seed = 0;
};

struct StageRecord {
  double tau = 0.0;
  Index k = 0;
  /// Solution of the stage's problem (objective and trace on that problem).
  SparseSolution solution;
};

struct MultiStageResult {
  SparseSolution solution;
  std::vector<StageRecord> stages;
};

/// Seed used for stage t (1-based) of a run seeded with `seed`.
std::uint64_t stage_seed(std::uint64_t seed, int stage);

/// One stage: a fresh Fisher matrix at w, anchor w̄ = w, α = 1/m, budget k,
/// solved with the selected single-stage solver.
SparseSolution solve_stage(const GradientOracle& oracle, const Vector& w,
                           Index k, const MultiStageOptions& opts,
                           std::uint64_t seed);

/// CHITA++: runs solve_stage for every schedule entry, each re-linearised at
/// the previous stage's output.
MultiStageResult chita_pp(const GradientOracle& oracle, const Vector& wbar,
                          const SparsitySchedule& schedule,
                          const MultiStageOptions& opts);

}  // namespace chita
