#pragma once

#include "chita/core.hpp"
#include "chita/linesearch.hpp"

#include <functional>

namespace chita {

struct SolverConfig {
  /// Line-searched IHT steps per outer iteration.
  int t_ht = 5;
  /// Cyclic CD sweeps over the support per outer iteration.
  int t_cd = 5;
  double gamma = 2.0;
  int max_outer = 100;
  /// Stop once an outer iteration lowers Q by less than rel_tol·|Q|.
  double rel_tol = 1e-7;
  int max_expansions = 30;

  void validate() const;
  LineSearchOptions line_search() const { return {gamma, max_expansions}; }
};

/// Exact minimisation of Q along coordinate i with the rest fixed, given
/// residual = b − Aw. Updates residual in place and returns the new w_i.
/// Throws InvalidArgument when w_i = 0 (moving it could break ‖w‖₀ ≤ k).
double cd_update(const ProblemInstance& inst, const Vector& w, Vector& residual,
                 Index i);

/// IHT-CD: per outer iteration, t_ht line-searched IHT steps followed by
/// t_cd ascending-order CD sweeps over the current support. Starts from
/// P_k(w0).
SparseSolution iht_cd(const ProblemInstance& inst, const Vector& w0, Index k,
                      const SolverConfig& cfg);

/// Called with (iteration, iterate) after every IHT step.
using IterateObserver = std::function<void(int, const Vector&)>;

/// Plain IHT with the searched stepsize and no CD: `iters` steps from P_k(w0),
/// recording Q after each. Stops early at a stationary point.
SparseSolution iht_linesearch(const ProblemInstance& inst, const Vector& w0,
                              Index k, int iters,
                              const LineSearchOptions& opts = {},
                              const IterateObserver& observe = {});

}  // namespace chita
