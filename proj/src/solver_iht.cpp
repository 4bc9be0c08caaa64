#include "chita/solver_iht.hpp"

#include "chita/kernels.hpp"

#include <cassert>
#include <cmath>

namespace chita {
namespace {

// Coordinate minimisation without the support check; `col_sq` is ‖a_i‖².
double coordinate_step(const ProblemInstance& inst, double wi, Vector& r,
                       Index i, double col_sq) {
  const auto a = inst.A().column(i);
  const double denom = col_sq + inst.ridge();
  if (denom <= 0.0) return wi;
  // ⟨a_i, r + a_i·w_i⟩ = ⟨a_i, r⟩ + ‖a_i‖²·w_i
  const double num = a.dot(r) + col_sq * wi + inst.ridge() * inst.wbar()[i];
  const double next = num / denom;
  if (next != wi) r.noalias() += (wi - next) * a;
  return next;
}

}  // namespace

void SolverConfig::validate() const {
  if (t_ht < 1) throw InvalidArgument("t_ht must be >= 1");
  if (t_cd < 0) throw InvalidArgument("t_cd must be >= 0");
  if (!(gamma > 1.0)) throw InvalidArgument("gamma must be > 1");
  if (max_outer < 1) throw InvalidArgument("max_outer must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidArgument("rel_tol must be > 0");
  if (max_expansions < 0) throw InvalidArgument("max_expansions must be >= 0");
}

double cd_update(const ProblemInstance& inst, const Vector& w, Vector& residual,
                 Index i) {
  if (i < 0 || i >= inst.p()) throw InvalidArgument("cd_update: index out of range");
  if (residual.size() != inst.n()) throw InvalidArgument("cd_update: residual length");
  if (w[i] == 0.0) {
    throw InvalidArgument("cd_update: coordinate " + std::to_string(i) +
                          " is not in the support");
  }
  return coordinate_step(inst, w[i], residual, i, inst.A().column(i).squaredNorm());
}

SparseSolution iht_cd(const ProblemInstance& inst, const Vector& w0, Index k,
                      const SolverConfig& cfg) {
  cfg.validate();
  if (w0.size() != inst.p()) throw InvalidArgument("iht_cd: w0 has wrong length");
  if (k < 1 || k > inst.p()) throw InvalidArgument("iht_cd: k out of range");
  const LineSearchOptions ls = cfg.line_search();

  Vector w = kernels::hard_threshold(w0, k);
  double q = objective(inst, w);
  SparseSolution sol;
  sol.trace.push_back(q);

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    const double q_start = q;

    for (int t = 0; t < cfg.t_ht; ++t) {
      const Vector grad = gradient(inst, w);
      const StepsizeResult step = search_stepsize(inst, w, grad, q, k, ls);
      if (step.step <= 0.0 || !(step.value <= q)) break;
      w = kernels::ht_step(w, grad, k, step.step);
      q = step.value;
    }

    if (cfg.t_cd > 0) {
      const IndexSet support = support_of(w);
      Vector col_sq(static_cast<Index>(support.size()));
      for (std::size_t t = 0; t < support.size(); ++t) {
        col_sq[static_cast<Index>(t)] = inst.A().column(support[t]).squaredNorm();
      }
      Vector r = residual(inst, w);
      for (int sweep = 0; sweep < cfg.t_cd; ++sweep) {
        for (std::size_t t = 0; t < support.size(); ++t) {
          const Index i = support[t];
#ifndef NDEBUG
          const double before = objective_from_residual(inst, w, r);
#endif
          w[i] = coordinate_step(inst, w[i], r, i, col_sq[static_cast<Index>(t)]);
#ifndef NDEBUG
          const double after = objective_from_residual(inst, w, r);
          assert(after <= before + 1e-9 * (1.0 + std::abs(before)));
#endif
        }
      }
      // Fresh residual bounds drift from the incremental updates.
      q = objective(inst, w);
    }

    sol.trace.push_back(q);
    sol.iterations = outer + 1;
    if (q_start - q <= cfg.rel_tol * std::max(std::abs(q_start), 1e-300)) break;
  }

  sol.weights = std::move(w);
  sol.support = support_of(sol.weights);
  sol.objective = q;
  return sol;
}

SparseSolution iht_linesearch(const ProblemInstance& inst, const Vector& w0,
                              Index k, int iters, const LineSearchOptions& opts,
                              const IterateObserver& observe) {
  if (iters < 0) throw InvalidArgument("iht_linesearch: iters must be >= 0");
  if (w0.size() != inst.p()) throw InvalidArgument("iht_linesearch: w0 has wrong length");
  if (k < 1 || k > inst.p()) throw InvalidArgument("iht_linesearch: k out of range");
  Vector w = kernels::hard_threshold(w0, k);
  double q = objective(inst, w);
  SparseSolution sol;
  sol.trace.push_back(q);
  for (int t = 0; t < iters; ++t) {
    const Vector grad = gradient(inst, w);
    const StepsizeResult step = search_stepsize(inst, w, grad, q, k, opts);
    if (step.step <= 0.0 || !(step.value <= q)) break;
    w = kernels::ht_step(w, grad, k, step.step);
    q = step.value;
    sol.trace.push_back(q);
    sol.iterations = t + 1;
    if (observe) observe(t + 1, w);
  }
  sol.weights = std::move(w);
  sol.support = support_of(sol.weights);
  sol.objective = q;
  return sol;
}

}  // namespace chita
