#pragma once

#include "chita/core.hpp"
#include "chita/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>

namespace testing {

using chita::Index;
using chita::Vector;

// Library instance plus an oracle copy of the same data.
struct Pair {
  chita::ProblemInstance inst;
  chita::oracles::Quadratic quad;
};

inline Pair random_pair(Index n, Index p, double lambda, Index k, std::uint64_t seed,
                        double alpha = 1.0) {
  auto A = chita::oracles::gaussian_matrix(n, p, seed);
  auto wbar = chita::oracles::gaussian_vector(p, seed + 1000003);
  auto quad = chita::oracles::make_quadratic(A, wbar, lambda, alpha);
  return {chita::build_problem(chita::GradientMatrix(A), wbar, lambda, k, alpha),
          std::move(quad)};
}

inline Pair pair_from(const Eigen::MatrixXd& A, const Vector& wbar, double lambda,
                      Index k, double alpha = 1.0) {
  return {chita::build_problem(chita::GradientMatrix(A), wbar, lambda, k, alpha),
          chita::oracles::make_quadratic(A, wbar, lambda, alpha)};
}

// A feasible point: random values on a random k-subset.
inline Vector random_sparse(Index p, Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Index> idx(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Vector w = Vector::Zero(p);
  for (Index t = 0; t < k; ++t) w[idx[static_cast<std::size_t>(t)]] = normal(rng);
  return w;
}

inline Index nnz(const Vector& w) { return (w.array() != 0.0).count(); }

inline bool non_increasing(const std::vector<double>& xs, double rel = 1e-12) {
  for (std::size_t t = 1; t < xs.size(); ++t) {
    if (xs[t] > xs[t - 1] + rel * (1.0 + std::abs(xs[t - 1]))) return false;
  }
  return true;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// Diagonal A (n = p): Q separates, so the best k-support keeps the k largest
// drops Q_i(0) − min_t Q_i(t).
inline chita::IndexSet separable_optimum(const Vector& a, const Vector& wbar, double lambda,
                                         double alpha, Index k) {
  const double nl = static_cast<double>(a.size()) * lambda;
  Vector gain(a.size());
  for (Index i = 0; i < a.size(); ++i) {
    const double bi = a[i] * wbar[i] - alpha;
    const double zero = 0.5 * bi * bi + 0.5 * nl * wbar[i] * wbar[i];
    const double t = (a[i] * bi + nl * wbar[i]) / (a[i] * a[i] + nl);
    const double r = bi - a[i] * t;
    const double kept = 0.5 * r * r + 0.5 * nl * (t - wbar[i]) * (t - wbar[i]);
    gain[i] = zero - kept;
  }
  return chita::oracles::sort_topk(gain, k);
}

}  // namespace testing
