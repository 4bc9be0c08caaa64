#pragma once

#include "chita/core.hpp"

namespace chita {

/// P_k(w̄). The objective field is NaN since no instance is involved.
SparseSolution magnitude_prune(const Vector& wbar, Index k);

/// P_k(w̄) with its objective under inst.
SparseSolution magnitude_prune(const ProblemInstance& inst, Index k);

/// OBD saliency w̄_i² / (2·H_ii + 1e-12) with H_ii = ‖A_{:,i}‖²/n.
Vector obd_scores(const ProblemInstance& inst);

/// Keeps w̄ on the k highest OBD scores (ties to the smaller index).
SparseSolution obd_prune(const ProblemInstance& inst, Index k);

/// IHT with fixed step 1/L, L from kernels::lipschitz_upper. The trace has
/// one entry per iteration after the projected start.
SparseSolution iht_constant_step(const ProblemInstance& inst, const Vector& w0,
                                 Index k, int iters);

}  // namespace chita
