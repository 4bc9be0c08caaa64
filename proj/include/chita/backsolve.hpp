#pragma once

#include "chita/activeset.hpp"

namespace chita {

struct BacksolveOptions {
  /// Largest |S| accepted for the λ = 0 dense fallback.
  Index dense_limit = 2000;
  /// Active-set multiple for the support-discovery stage.
  double active_mult = 2.0;
};

/// Thrown when λ = 0 and |S| exceeds the dense fallback limit.
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimiser of Q over {w : supp(w) ⊆ S}.
///
/// For λ > 0 this is the Woodbury form of (nλI + A_S⊤A_S)⁻¹(nλw̄_S + A_S⊤b):
///   c   = nλ·w̄_S + A_S⊤b
///   w_S = (c − A_S⊤ (nλI_n + A_S A_S⊤)⁻¹ A_S c) / nλ
/// which needs one n×n Cholesky factorisation, O(n²|S|) overall.
/// For λ = 0 the |S|×|S| normal equations are solved directly.
SparseSolution restricted_exact_solve(const ProblemInstance& inst,
                                      const IndexSet& support,
                                      const BacksolveOptions& opts = {});

/// CHITA-BSO: active-set IHT without CD sweeps finds a support, then the
/// weights on it are replaced by the exact restricted solution.
SparseSolution chita_bso(const ProblemInstance& inst, const Vector& w0, Index k,
                         const SolverConfig& cfg,
                         const BacksolveOptions& opts = {},
                         const ActiveSetOptions& active_opts = {});

/// Overload taking only the IHT round count; other settings use defaults.
SparseSolution chita_bso(const ProblemInstance& inst, const Vector& w0, Index k,
                         int t_ht);

}  // namespace chita
