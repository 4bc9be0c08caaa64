#pragma once

#include "chita/core.hpp"

namespace chita::kernels {

// OpenMP matrix-vector products. Work is split into fixed-size chunks whose
// partial results are combined in chunk order, so output is bitwise
// reproducible for any thread count.

/// A·x. Zero entries of x are skipped, so a k-sparse x costs O(nk).
Vector matvec(const GradientMatrix& A, const Vector& x);

/// A⊤·r, one independent dot product per column.
Vector rmatvec(const GradientMatrix& A, const Vector& r);

/// Serial loops with no skipping or blocking. Kept as the correctness
/// reference for the parallel products and as the benchmark baseline.
namespace reference {
Vector matvec(const GradientMatrix& A, const Vector& x);
Vector rmatvec(const GradientMatrix& A, const Vector& r);
}  // namespace reference

/// Indices of the k largest-magnitude entries of x, ascending. Equal
/// magnitudes go to the smaller index.
IndexSet topk_indices(const Vector& x, Index k);

/// P_k(x): keeps the entries at topk_indices(x, k) and zeroes the rest.
Vector hard_threshold(const Vector& x, Index k);

/// P_k(w − step·∇Q(w)).
Vector ht_step(const ProblemInstance& inst, const Vector& w, Index k,
               double step);

/// Same step with a caller-supplied gradient.
Vector ht_step(const Vector& w, const Vector& grad, Index k, double step);

struct LipschitzEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Upper estimate of L = nλ + ‖A‖₂². ‖A‖₂² comes from power iteration on
/// A⊤A (started from a fixed-seed vector) and is inflated by (1 + tol).
/// After `max_iter` iterations the last iterate is reported unconverged.
LipschitzEstimate lipschitz_upper(const ProblemInstance& inst,
                                  double tol = 1e-4, int max_iter = 500);

}  // namespace chita::kernels
