#include "chita/activeset.hpp"

#include "chita/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace chita {
namespace {

bool leaves(const IndexSet& support, const IndexSet& active) {
  return !std::includes(active.begin(), active.end(), support.begin(),
                        support.end());
}

}  // namespace

IndexSet init_active_set(const Vector& w0, Index k, double mult) {
  const Index p = w0.size();
  if (k < 1 || k > p) throw InvalidArgument("init_active_set: k out of range");
  if (!(mult >= 1.0)) throw InvalidArgument("init_active_set: mult must be >= 1");
  const double want = std::ceil(mult * static_cast<double>(k));
  const Index size = want >= static_cast<double>(p) ? p : static_cast<Index>(want);
  return kernels::topk_indices(w0, size);
}

SparseSolution chita_cd(const ProblemInstance& inst, const Vector& w0, Index k,
                        const SolverConfig& cfg, const IndexSet& active0,
                        const ActiveSetOptions& opts) {
  cfg.validate();
  const Index p = inst.p();
  if (w0.size() != p) throw InvalidArgument("chita_cd: w0 has wrong length");
  if (k < 1 || k > p) throw InvalidArgument("chita_cd: k out of range");

  IndexSet active = active0;
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  if (static_cast<Index>(active.size()) < k) {
    throw InvalidArgument("chita_cd: active set smaller than k");
  }
  if (active.front() < 0 || active.back() >= p) {
    throw InvalidArgument("chita_cd: active index out of range");
  }

  const LineSearchOptions ls = cfg.line_search();
  SparseSolution out;
  Vector w = w0;
  Vector w_half;

  for (int round = 0;; ++round) {
    const ProblemInstance sub = restrict_columns(inst, active);
    SparseSolution inner = iht_cd(sub, gather(w, active), k, cfg);
    w_half = embed(p, active, inner.weights);
    out.trace.insert(out.trace.end(), inner.trace.begin(), inner.trace.end());
    out.iterations += inner.iterations;

    if (!opts.probe || round >= opts.max_rounds ||
        static_cast<Index>(active.size()) == p) {
      break;
    }

    const double q_half = objective(inst, w_half);
    const Vector grad = gradient(inst, w_half);
    const StepsizeResult base = search_stepsize(inst, w_half, grad, k, ls);

    std::vector<double> ladder;
    if (base.step > 0.0) ladder.push_back(base.step);
    double rung = (std::isfinite(base.tau_c) && base.tau_c > 0.0) ? base.tau_c
                                                                   : base.step;
    if (rung > 0.0) {
      for (int j = 0; j <= opts.ladder; ++j, rung *= cfg.gamma) ladder.push_back(rung);
    }

    bool escaped = false;
    for (double tau : ladder) {
      Vector trial = kernels::ht_step(w_half, grad, k, tau);
      const IndexSet trial_support = support_of(trial);
      if (!leaves(trial_support, active)) continue;
      if (!(objective(inst, trial) < q_half)) continue;
      IndexSet grown;
      std::set_union(active.begin(), active.end(), trial_support.begin(),
                     trial_support.end(), std::back_inserter(grown));
      active = std::move(grown);
      w = std::move(trial);
      escaped = true;
      break;
    }
    if (!escaped) break;
  }

  out.weights = std::move(w_half);
  out.support = support_of(out.weights);
  out.objective = objective(inst, out.weights);
  return out;
}

}  // namespace chita
