#include "chita/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace chita::oracles {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
  }
  return M;
}

Vec gaussian_vector(Eigen::Index len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec v(len);
  for (Eigen::Index i = 0; i < len; ++i) v[i] = normal(rng);
  return v;
}

Vec naive_matvec(const Matrix& A, const Vec& x) {
  Vec y(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) s += A(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Vec naive_rmatvec(const Matrix& A, const Vec& r) {
  Vec y(A.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) s += A(i, j) * r[i];
    y[j] = s;
  }
  return y;
}

Quadratic make_quadratic(Matrix A, Vec wbar, double lambda, double alpha) {
  Quadratic q{std::move(A), std::move(wbar), lambda, alpha, {}};
  q.b = naive_matvec(q.A, q.wbar);
  for (Eigen::Index i = 0; i < q.b.size(); ++i) q.b[i] -= alpha;
  return q;
}

double naive_objective(const Quadratic& q, const Vec& w) {
  const Vec Aw = naive_matvec(q.A, w);
  double fit = 0.0;
  for (Eigen::Index i = 0; i < q.n(); ++i) {
    const double r = q.b[i] - Aw[i];
    fit += r * r;
  }
  double ridge = 0.0;
  for (Eigen::Index j = 0; j < q.p(); ++j) {
    const double d = w[j] - q.wbar[j];
    ridge += d * d;
  }
  return 0.5 * fit + 0.5 * static_cast<double>(q.n()) * q.lambda * ridge;
}

Vec naive_gradient(const Quadratic& q, const Vec& w) {
  Vec r = naive_matvec(q.A, w);
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] -= q.b[i];
  Vec g = naive_rmatvec(q.A, r);
  const double nl = static_cast<double>(q.n()) * q.lambda;
  for (Eigen::Index j = 0; j < g.size(); ++j) g[j] += nl * (w[j] - q.wbar[j]);
  return g;
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec y = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    y[j] = x[j] + h;
    const double up = f(y);
    y[j] = x[j] - h;
    const double down = f(y);
    y[j] = x[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_rel_error(const Vec& a, const Vec& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
  }
  return worst;
}

Indices sort_topk(const Vec& x, Eigen::Index k) {
  Indices order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

Vec sort_threshold(const Vec& x, Eigen::Index k) {
  Vec y = Vec::Zero(x.size());
  for (Eigen::Index i : sort_topk(x, k)) y[i] = x[i];
  return y;
}

Vec dense_restricted_solve(const Quadratic& q, const Indices& S) {
  const auto s = static_cast<Eigen::Index>(S.size());
  Matrix AS(q.n(), s);
  Vec wS(s);
  for (Eigen::Index t = 0; t < s; ++t) {
    AS.col(t) = q.A.col(S[static_cast<std::size_t>(t)]);
    wS[t] = q.wbar[S[static_cast<std::size_t>(t)]];
  }
  const double nl = static_cast<double>(q.n()) * q.lambda;
  Matrix H = AS.transpose() * AS;
  H.diagonal().array() += nl;
  const Vec rhs = nl * wS + AS.transpose() * q.b;
  Vec sol;
  if (nl > 0.0) {
    sol = H.ldlt().solve(rhs);
  } else {
    sol = H.completeOrthogonalDecomposition().solve(rhs);
  }
  Vec w = Vec::Zero(q.p());
  for (Eigen::Index t = 0; t < s; ++t) w[S[static_cast<std::size_t>(t)]] = sol[t];
  return w;
}

SubsetOptimum best_subset(const Quadratic& q, Eigen::Index k) {
  SubsetOptimum best;
  best.objective = std::numeric_limits<double>::infinity();
  const Eigen::Index p = q.p();
  std::vector<bool> pick(static_cast<std::size_t>(p), false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    Indices S;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (pick[static_cast<std::size_t>(j)]) S.push_back(j);
    }
    Vec w = dense_restricted_solve(q, S);
    const double f = naive_objective(q, w);
    ++best.supports_checked;
    if (f < best.objective) {
      best.objective = f;
      best.support = S;
      best.w = std::move(w);
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 400 && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  // Endpoints can win when the function is monotone on the interval.
  double best = 0.5 * (a + b), fbest = f(best);
  if (f(lo) < fbest) best = lo, fbest = f(lo);
  if (f(hi) < fbest) best = hi;
  return best;
}

double parabolic_vertex(const std::function<double(double)>& f, double x, double h) {
  const double fm = f(x - h), f0 = f(x), fp = f(x + h);
  const double curv = fm - 2.0 * f0 + fp;
  if (!(curv > 0.0)) return x;
  return x + 0.5 * h * (fm - fp) / curv;
}

double svd_sigma_max_sq(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const double s = svd.singularValues()[0];
  return s * s;
}

DiagonalQuadraticOracle::DiagonalQuadraticOracle(Vec curvature, Matrix centres)
    : curvature_(std::move(curvature)), centres_(std::move(centres)) {}

DiagonalQuadraticOracle DiagonalQuadraticOracle::random(Eigen::Index dim,
                                                        Eigen::Index samples,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> curv(0.5, 2.0);
  Vec d(dim);
  for (Eigen::Index j = 0; j < dim; ++j) d[j] = curv(rng);
  return {d, gaussian_matrix(dim, samples, seed + 1)};
}

double DiagonalQuadraticOracle::loss(const Vector& w, std::span<const Index> batch) const {
  double total = 0.0;
  for (Index i : batch) {
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const double d = w[j] - centres_(j, i);
      total += 0.5 * curvature_[j] * d * d;
    }
  }
  return total / static_cast<double>(batch.size());
}

Vector DiagonalQuadraticOracle::gradient(const Vector& w, std::span<const Index> batch) const {
  Vector g = Vector::Zero(w.size());
  for (Index i : batch) {
    for (Eigen::Index j = 0; j < w.size(); ++j) g[j] += curvature_[j] * (w[j] - centres_(j, i));
  }
  return g / static_cast<double>(batch.size());
}

}  // namespace chita::oracles
