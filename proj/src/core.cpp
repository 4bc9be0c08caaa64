#include "chita/core.hpp"

#include "chita/kernels.hpp"

#include <cmath>
#include <string>

namespace chita {

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidArgument(std::string(what) + " has non-finite entries");
  }
}

GradientMatrix::GradientMatrix(Eigen::MatrixXd data) {
  if (data.rows() < 1 || data.cols() < 1) {
    throw InvalidArgument("gradient matrix must have at least one row and column");
  }
  if (!data.allFinite()) {
    throw InvalidArgument("gradient matrix has non-finite entries");
  }
  rows_ = data.rows();
  cols_ = data.cols();
  storage_ = std::make_shared<const Eigen::MatrixXd>(std::move(data));
}

GradientMatrix GradientMatrix::column_window(Index begin, Index count) const {
  if (begin < 0 || count < 1 || begin + count > cols_) {
    throw InvalidArgument("column window out of range");
  }
  GradientMatrix out;
  out.storage_ = storage_;
  out.offset_ = offset_ + begin;
  out.rows_ = rows_;
  out.cols_ = count;
  return out;
}

GradientMatrix GradientMatrix::gather(std::span<const Index> columns) const {
  if (columns.empty()) throw InvalidArgument("cannot gather zero columns");
  Eigen::MatrixXd out(rows_, static_cast<Index>(columns.size()));
  for (std::size_t t = 0; t < columns.size(); ++t) {
    const Index j = columns[t];
    if (j < 0 || j >= cols_) throw InvalidArgument("gather index out of range");
    out.col(static_cast<Index>(t)) = column(j);
  }
  GradientMatrix g;
  g.rows_ = out.rows();
  g.cols_ = out.cols();
  g.storage_ = std::make_shared<const Eigen::MatrixXd>(std::move(out));
  return g;
}

ProblemInstance ProblemInstance::with_k(Index k) const {
  if (k < 1 || k > p()) throw InvalidArgument("k out of range");
  ProblemInstance out = *this;
  out.k_ = k;
  return out;
}

ProblemInstance build_problem(GradientMatrix A, Vector wbar, double lambda,
                              Index k, double alpha) {
  if (A.rows() < 1 || A.cols() < 1) throw InvalidArgument("empty gradient matrix");
  if (wbar.size() != A.cols()) {
    throw InvalidArgument("wbar length " + std::to_string(wbar.size()) +
                          " does not match p = " + std::to_string(A.cols()));
  }
  check_finite(wbar, "wbar");
  if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  if (!std::isfinite(alpha) || alpha <= 0.0) throw InvalidArgument("alpha must be > 0");
  if (k < 1 || k > A.cols()) throw InvalidArgument("k out of range [1, p]");

  ProblemInstance inst;
  inst.b_ = kernels::matvec(A, wbar);
  inst.b_.array() -= alpha;
  inst.A_ = std::move(A);
  inst.wbar_ = std::move(wbar);
  inst.lambda_ = lambda;
  inst.alpha_ = alpha;
  inst.k_ = k;
  return inst;
}

ProblemInstance restrict_columns(const ProblemInstance& inst,
                                 std::span<const Index> columns) {
  if (columns.empty()) throw InvalidArgument("empty column restriction");
  ProblemInstance out;
  const bool identity = static_cast<Index>(columns.size()) == inst.p() &&
                        columns.front() == 0 && columns.back() == inst.p() - 1;
  out.A_ = identity ? inst.A_ : inst.A_.gather(columns);
  out.wbar_ = gather(inst.wbar_, columns);
  out.b_ = inst.b_;
  out.lambda_ = inst.lambda_;
  out.alpha_ = inst.alpha_;
  out.k_ = std::min<Index>(inst.k_, out.A_.cols());
  double dropped = inst.wbar_.squaredNorm() - out.wbar_.squaredNorm();
  out.offset_ = inst.offset_ + 0.5 * inst.ridge() * std::max(0.0, dropped);
  return out;
}

Vector residual(const ProblemInstance& inst, const Vector& w) {
  if (w.size() != inst.p()) throw InvalidArgument("w has wrong length");
  Vector r = inst.b() - kernels::matvec(inst.A(), w);
  return r;
}

double objective_from_residual(const ProblemInstance& inst, const Vector& w,
                               const Vector& r) {
  double ridge_term = 0.0;
  if (inst.lambda() > 0.0) ridge_term = (w - inst.wbar()).squaredNorm();
  return 0.5 * r.squaredNorm() + 0.5 * inst.ridge() * ridge_term + inst.offset();
}

double objective(const ProblemInstance& inst, const Vector& w) {
  return objective_from_residual(inst, w, residual(inst, w));
}

Vector gradient(const ProblemInstance& inst, const Vector& w) {
  Vector r = residual(inst, w);
  Vector g = kernels::rmatvec(inst.A(), r);
  g = -g;
  if (inst.lambda() > 0.0) g += inst.ridge() * (w - inst.wbar());
  return g;
}

IndexSet support_of(const Vector& w) {
  IndexSet s;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) s.push_back(i);
  }
  return s;
}

SparseSolution SparseSolution::from_weights(const ProblemInstance& inst, Vector w) {
  SparseSolution s;
  s.objective = chita::objective(inst, w);
  s.support = support_of(w);
  s.weights = std::move(w);
  return s;
}

Vector embed(Index p, std::span<const Index> indices, const Vector& values) {
  Vector out = Vector::Zero(p);
  for (std::size_t t = 0; t < indices.size(); ++t) {
    out[indices[t]] = values[static_cast<Index>(t)];
  }
  return out;
}

Vector gather(const Vector& x, std::span<const Index> indices) {
  Vector out(static_cast<Index>(indices.size()));
  for (std::size_t t = 0; t < indices.size(); ++t) {
    out[static_cast<Index>(t)] = x[indices[t]];
  }
  return out;
}

}  // namespace chita
