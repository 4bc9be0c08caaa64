#pragma once

#include "chita/core.hpp"

#include <limits>

namespace chita {

/// Outcome of the piecewise-quadratic stepsize search.
struct StepsizeResult {
  double step = 0.0;
  /// First breakpoint of g(τ) = Q(P_k(w − τ∇Q(w))); +∞ if there is none.
  double tau_c = std::numeric_limits<double>::infinity();
  /// Minimiser of g over [0, tau_c].
  double tau_m = 0.0;
  /// Number of γ-multiplications accepted beyond tau_c.
  int expansions = 0;
  /// Value g(step).
  double value = 0.0;
};

struct LineSearchOptions {
  double gamma = 2.0;
  int max_expansions = 30;
};

/// Largest τ' such that the hard-thresholded support of w − τ·grad stays
/// equal to S = topk_indices(w, k) for all τ in [0, τ').
///
/// An in-support coordinate i has magnitude |w_i| − τ·s_i with shrink rate
/// s_i = grad_i·sign(w_i) (s_i = −|grad_i| when w_i = 0); an off-support
/// coordinate grows no faster than τ·G with G = max_{j∉S} |grad_j|. The
/// breakpoint is min_i |w_i| / (G + s_i) over denominators > 0, and +∞ when
/// G = 0 or S covers every coordinate.
double first_breakpoint(const Vector& w, const Vector& grad, Index k);

/// Same, for an explicit in-support set.
double first_breakpoint(const Vector& w, const Vector& grad,
                        std::span<const Index> support);

/// Minimiser over [0, tau_c] of the quadratic g(τ) = Q(w − τd), d being grad
/// restricted to S = topk_indices(w, k). O(n·|S|).
double first_piece_minimizer(const ProblemInstance& inst, const Vector& w,
                             const Vector& grad, Index k, double tau_c);

double first_piece_minimizer(const ProblemInstance& inst, const Vector& w,
                             const Vector& grad,
                             std::span<const Index> support, double tau_c);

/// g(τ) = Q(P_k(w − τ·grad)).
double step_value(const ProblemInstance& inst, const Vector& w,
                  const Vector& grad, Index k, double tau);

/// Stepsize for one IHT step from feasible w: exact minimiser on the first
/// quadratic piece if it is interior, otherwise geometric expansion from the
/// breakpoint while g keeps decreasing.
StepsizeResult search_stepsize(const ProblemInstance& inst, const Vector& w,
                               Index k, const LineSearchOptions& opts = {});

/// Same, reusing a gradient already computed at w.
StepsizeResult search_stepsize(const ProblemInstance& inst, const Vector& w,
                               const Vector& grad, Index k,
                               const LineSearchOptions& opts = {});

/// Same, also reusing Q(w) = q0.
StepsizeResult search_stepsize(const ProblemInstance& inst, const Vector& w,
                               const Vector& grad, double q0, Index k,
                               const LineSearchOptions& opts = {});

}  // namespace chita
