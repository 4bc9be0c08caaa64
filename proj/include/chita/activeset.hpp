#pragma once

#include "chita/solver_iht.hpp"

namespace chita {

struct ActiveSetOptions {
  /// Augmentation rounds before giving up on further escapes.
  int max_rounds = 20;
  /// Geometric probe ladder τ_c·γ^j, j = 0..ladder.
  int ladder = 16;
  /// Disables the full-space probe (restricted solve only).
  bool probe = true;
};

/// topk_indices(w0, min(ceil(mult·k), p)).
IndexSet init_active_set(const Vector& w0, Index k, double mult);

/// Active-set IHT-CD. Each round solves IHT-CD on the columns in the active
/// set, then probes full-space IHT steps for a strictly better point whose
/// support leaves the set. A successful probe grows the set by that support
/// and seeds the next round; otherwise the round's solution is returned.
SparseSolution chita_cd(const ProblemInstance& inst, const Vector& w0, Index k,
                        const SolverConfig& cfg, const IndexSet& active0,
                        const ActiveSetOptions& opts = {});

}  // namespace chita
