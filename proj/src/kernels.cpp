#include "chita/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace chita::kernels {
namespace {

// Nonzero columns summed per matvec chunk.
constexpr Index kMatvecChunk = 256;

}  // namespace

Vector matvec(const GradientMatrix& A, const Vector& x) {
  if (x.size() != A.cols()) throw InvalidArgument("matvec: length mismatch");
  const Index n = A.rows();

  std::vector<Index> nz;
  nz.reserve(static_cast<std::size_t>(x.size()));
  for (Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) nz.push_back(j);
  }
  const Index count = static_cast<Index>(nz.size());
  const Index chunks = (count + kMatvecChunk - 1) / kMatvecChunk;
  Vector out = Vector::Zero(n);
  if (chunks == 0) return out;
  if (chunks == 1) {
    for (Index j : nz) out.noalias() += x[j] * A.column(j);
    return out;
  }

  Eigen::MatrixXd partial(n, chunks);
#pragma omp parallel for schedule(static) if (chunks > 1 && count * n > 1 << 15)
  for (Index c = 0; c < chunks; ++c) {
    auto acc = partial.col(c);
    acc.setZero();
    const Index end = std::min(count, (c + 1) * kMatvecChunk);
    for (Index t = c * kMatvecChunk; t < end; ++t) {
      const Index j = nz[static_cast<std::size_t>(t)];
      acc.noalias() += x[j] * A.column(j);
    }
  }
  for (Index c = 0; c < chunks; ++c) out += partial.col(c);
  return out;
}

Vector rmatvec(const GradientMatrix& A, const Vector& r) {
  if (r.size() != A.rows()) throw InvalidArgument("rmatvec: length mismatch");
  const Index p = A.cols();
  Vector out(p);
#pragma omp parallel for schedule(static) if (p * A.rows() > 1 << 15)
  for (Index j = 0; j < p; ++j) {
    out[j] = A.column(j).dot(r);
  }
  return out;
}

namespace reference {

Vector matvec(const GradientMatrix& A, const Vector& x) {
  if (x.size() != A.cols()) throw InvalidArgument("matvec: length mismatch");
  const Index n = A.rows();
  const double* a = A.data();
  Vector out = Vector::Zero(n);
  for (Index j = 0; j < A.cols(); ++j) {
    const double xj = x[j];
    for (Index i = 0; i < n; ++i) out[i] += a[j * n + i] * xj;
  }
  return out;
}

Vector rmatvec(const GradientMatrix& A, const Vector& r) {
  if (r.size() != A.rows()) throw InvalidArgument("rmatvec: length mismatch");
  const Index n = A.rows();
  const double* a = A.data();
  Vector out(A.cols());
  for (Index j = 0; j < A.cols(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += a[j * n + i] * r[i];
    out[j] = s;
  }
  return out;
}

}  // namespace reference

IndexSet topk_indices(const Vector& x, Index k) {
  const Index p = x.size();
  if (k < 1 || k > p) throw InvalidArgument("topk_indices: k out of range");
  IndexSet idx(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k < p) {
    auto before = [&x](Index a, Index b) {
      const double ma = std::abs(x[a]);
      const double mb = std::abs(x[b]);
      return ma > mb || (ma == mb && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), before);
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

Vector hard_threshold(const Vector& x, Index k) {
  Vector y = Vector::Zero(x.size());
  for (Index i : topk_indices(x, k)) y[i] = x[i];
  return y;
}

Vector ht_step(const Vector& w, const Vector& grad, Index k, double step) {
  if (w.size() != grad.size()) throw InvalidArgument("ht_step: length mismatch");
  if (!(step >= 0.0)) throw InvalidArgument("ht_step: step must be >= 0");
  Vector trial = w - step * grad;
  return hard_threshold(trial, k);
}

Vector ht_step(const ProblemInstance& inst, const Vector& w, Index k,
               double step) {
  return ht_step(w, gradient(inst, w), k, step);
}

LipschitzEstimate lipschitz_upper(const ProblemInstance& inst, double tol,
                                  int max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("lipschitz_upper: tol must be > 0");
  const GradientMatrix& A = inst.A();
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  Vector v(A.cols());
  for (Index j = 0; j < v.size(); ++j) v[j] = normal(rng);
  v.normalize();

  LipschitzEstimate est;
  double sigma2 = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector u = rmatvec(A, matvec(A, v));
    const double rayleigh = v.dot(u);
    const double norm = u.norm();
    est.iterations = it;
    if (norm == 0.0) {
      sigma2 = 0.0;
      est.converged = true;
      break;
    }
    const bool settled = std::abs(rayleigh - sigma2) <= tol * rayleigh;
    sigma2 = rayleigh;
    v = u / norm;
    if (settled) {
      est.converged = true;
      break;
    }
  }
  est.value = inst.ridge() + sigma2 * (1.0 + tol);
  return est;
}

}  // namespace chita::kernels
