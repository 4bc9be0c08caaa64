#include "chita/baselines.hpp"

#include "chita/kernels.hpp"

#include <limits>

namespace chita {

SparseSolution magnitude_prune(const Vector& wbar, Index k) {
  SparseSolution s;
  s.weights = kernels::hard_threshold(wbar, k);
  s.support = support_of(s.weights);
  s.objective = std::numeric_limits<double>::quiet_NaN();
  return s;
}

SparseSolution magnitude_prune(const ProblemInstance& inst, Index k) {
  SparseSolution s = SparseSolution::from_weights(inst, kernels::hard_threshold(inst.wbar(), k));
  s.trace.push_back(s.objective);
  return s;
}

Vector obd_scores(const ProblemInstance& inst) {
  constexpr double kGuard = 1e-12;
  const double n = static_cast<double>(inst.n());
  Vector scores(inst.p());
  for (Index i = 0; i < inst.p(); ++i) {
    const double curvature = inst.A().column(i).squaredNorm() / n;
    const double wi = inst.wbar()[i];
    scores[i] = wi * wi / (2.0 * curvature + kGuard);
  }
  return scores;
}

SparseSolution obd_prune(const ProblemInstance& inst, Index k) {
  Vector w = Vector::Zero(inst.p());
  for (Index i : kernels::topk_indices(obd_scores(inst), k)) w[i] = inst.wbar()[i];
  SparseSolution s = SparseSolution::from_weights(inst, std::move(w));
  s.trace.push_back(s.objective);
  return s;
}

SparseSolution iht_constant_step(const ProblemInstance& inst, const Vector& w0,
                                 Index k, int iters) {
  if (iters < 0) throw InvalidArgument("iht_constant_step: iters must be >= 0");
  if (w0.size() != inst.p()) throw InvalidArgument("iht_constant_step: w0 has wrong length");
  Vector w = kernels::hard_threshold(w0, k);
  SparseSolution sol;
  sol.trace.push_back(objective(inst, w));
  if (iters > 0) {
    const double step = 1.0 / kernels::lipschitz_upper(inst).value;
    for (int t = 0; t < iters; ++t) {
      w = kernels::ht_step(inst, w, k, step);
      sol.trace.push_back(objective(inst, w));
    }
  }
  sol.iterations = iters;
  sol.objective = sol.trace.back();
  sol.weights = std::move(w);
  sol.support = support_of(sol.weights);
  return sol;
}

}  // namespace chita
