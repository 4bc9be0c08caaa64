#include "chita/linesearch.hpp"

#include "chita/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace chita {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPastBreakpoint = 1e-10;

// Support P_k picks for τ → 0⁺: the nonzeros of w, padded with the zero
// coordinates of largest |grad| (ties to the smaller index).
IndexSet entering_support(const Vector& w, const Vector& grad, Index k) {
  IndexSet nonzero = support_of(w);
  const Index need = k - static_cast<Index>(nonzero.size());
  if (need <= 0) return nonzero;
  IndexSet zeros;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) zeros.push_back(i);
  }
  Vector gz = gather(grad, zeros);
  IndexSet out = nonzero;
  for (Index t : kernels::topk_indices(gz, need)) {
    out.push_back(zeros[static_cast<std::size_t>(t)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double first_breakpoint(const Vector& w, const Vector& grad,
                        std::span<const Index> support) {
  if (w.size() != grad.size()) throw InvalidArgument("first_breakpoint: length mismatch");
  const Index p = w.size();
  if (static_cast<Index>(support.size()) >= p) return kInf;

  std::vector<char> in_support(static_cast<std::size_t>(p), 0);
  for (Index i : support) in_support[static_cast<std::size_t>(i)] = 1;
  double off_max = 0.0;
  for (Index j = 0; j < p; ++j) {
    if (!in_support[static_cast<std::size_t>(j)]) {
      off_max = std::max(off_max, std::abs(grad[j]));
    }
  }
  // Off-support entries stay at zero for every τ.
  if (off_max == 0.0) return kInf;

  double tau_c = kInf;
  for (Index i : support) {
    const double shrink =
        w[i] > 0.0 ? grad[i] : (w[i] < 0.0 ? -grad[i] : -std::abs(grad[i]));
    const double denom = off_max + shrink;
    if (denom <= 0.0) continue;
    tau_c = std::min(tau_c, std::abs(w[i]) / denom);
  }
  return tau_c;
}

double first_breakpoint(const Vector& w, const Vector& grad, Index k) {
  if (k < 1 || k > w.size()) throw InvalidArgument("first_breakpoint: k out of range");
  const IndexSet support = kernels::topk_indices(w, k);
  return first_breakpoint(w, grad, support);
}

double first_piece_minimizer(const ProblemInstance& inst, const Vector& w,
                             const Vector& grad,
                             std::span<const Index> support, double tau_c) {
  if (w.size() != inst.p() || grad.size() != inst.p()) {
    throw InvalidArgument("first_piece_minimizer: length mismatch");
  }
  const GradientMatrix& A = inst.A();
  Vector Ad = Vector::Zero(inst.n());
  double dd = 0.0;
  for (Index i : support) {
    const double di = grad[i];
    if (di == 0.0) continue;
    dd += di * di;
    Ad.noalias() += di * A.column(i);
  }
  const double denom = Ad.squaredNorm() + inst.ridge() * dd;
  if (denom <= 0.0 || dd == 0.0) return 0.0;
  return std::clamp(dd / denom, 0.0, tau_c);
}

double first_piece_minimizer(const ProblemInstance& inst, const Vector& w,
                             const Vector& grad, Index k, double tau_c) {
  const IndexSet support = kernels::topk_indices(w, k);
  return first_piece_minimizer(inst, w, grad, support, tau_c);
}

double step_value(const ProblemInstance& inst, const Vector& w,
                  const Vector& grad, Index k, double tau) {
  return objective(inst, kernels::ht_step(w, grad, k, tau));
}

StepsizeResult search_stepsize(const ProblemInstance& inst, const Vector& w,
                               const Vector& grad, Index k,
                               const LineSearchOptions& opts) {
  return search_stepsize(inst, w, grad, objective(inst, w), k, opts);
}

StepsizeResult search_stepsize(const ProblemInstance& inst, const Vector& w,
                               const Vector& grad, double q0, Index k,
                               const LineSearchOptions& opts) {
  if (!(opts.gamma > 1.0)) throw InvalidArgument("search_stepsize: gamma must be > 1");
  if (k < 1 || k > inst.p()) throw InvalidArgument("search_stepsize: k out of range");

  StepsizeResult res;
  res.value = q0;
  if (grad.squaredNorm() == 0.0) {
    res.tau_m = 0.0;
    return res;
  }

  IndexSet support = kernels::topk_indices(w, k);
  res.tau_c = first_breakpoint(w, grad, support);
  if (res.tau_c == 0.0) {
    // Zero padding in S was outranked by an off-support gradient; the piece
    // starting at 0⁺ uses the support P_k actually selects there.
    support = entering_support(w, grad, k);
    res.tau_c = first_breakpoint(w, grad, support);
  }
  res.tau_m = first_piece_minimizer(inst, w, grad, support, res.tau_c);

  bool flat = true;
  for (Index i : support) {
    if (grad[i] != 0.0) {
      flat = false;
      break;
    }
  }
  // On a flat first piece every τ in [0, τ_c] is a minimiser; take τ_c so the
  // support can move.
  const bool expand = std::isfinite(res.tau_c) && res.tau_c > 0.0 &&
                      (flat || res.tau_m >= res.tau_c);
  if (!expand) {
    res.step = res.tau_m;
    res.value = res.step > 0.0 ? step_value(inst, w, grad, k, res.step) : q0;
    return res;
  }
  if (flat) res.tau_m = res.tau_c;

  double tau = res.tau_c;
  double best = step_value(inst, w, grad, k, tau);
  // At τ_c itself the entering and leaving magnitudes tie and P_k keeps the
  // old support; the swapped support only appears just past it.
  const double past_tau = res.tau_c * (1.0 + kPastBreakpoint);
  const double past = step_value(inst, w, grad, k, past_tau);
  if (past < best) {
    tau = past_tau;
    best = past;
  }
  while (res.expansions < opts.max_expansions) {
    const double next = step_value(inst, w, grad, k, opts.gamma * tau);
    if (!(next < best)) break;
    best = next;
    tau *= opts.gamma;
    ++res.expansions;
  }
  res.step = tau;
  res.value = best;

  if (res.value > q0) {
    // Only possible through a magnitude tie exactly at τ_c; step back into
    // the first piece.
    res.expansions = 0;
    res.step = flat ? 0.0 : res.tau_c * (1.0 - 1e-9);
    res.value = res.step > 0.0 ? step_value(inst, w, grad, k, res.step) : q0;
    if (res.value > q0) {
      res.step = 0.0;
      res.value = q0;
    }
  }
  return res;
}

StepsizeResult search_stepsize(const ProblemInstance& inst, const Vector& w,
                               Index k, const LineSearchOptions& opts) {
  return search_stepsize(inst, w, gradient(inst, w), k, opts);
}

}  // namespace chita
