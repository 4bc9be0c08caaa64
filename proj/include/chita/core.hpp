#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chita {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
/// Ascending list of coordinate indices.
using IndexSet = std::vector<Index>;

/// Thrown for shape, range and finiteness violations on inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense n×p matrix whose row i is the (mini-batch averaged) loss gradient of
/// sample i at the reference weights.
///
/// Entries are held column-major so that a contiguous range of parameters is
/// a zero-copy window into the same storage. Consumers only ever form
/// matrix-vector products with it; A⊤A is never materialised.
class GradientMatrix {
 public:
  GradientMatrix() = default;

  /// Takes ownership of an n×p matrix. Throws InvalidArgument when empty or
  /// when any entry is not finite.
  explicit GradientMatrix(Eigen::MatrixXd data);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  Eigen::Map<const Eigen::MatrixXd> view() const {
    return {data(), rows_, cols_};
  }
  Eigen::Map<const Vector> column(Index j) const {
    return {data() + j * rows_, rows_};
  }
  const double* data() const { return storage_->data() + offset_ * rows_; }

  /// Columns [begin, begin+count) sharing this matrix's storage.
  GradientMatrix column_window(Index begin, Index count) const;

  /// Copy of the listed columns, in the listed order.
  GradientMatrix gather(std::span<const Index> columns) const;

  /// Size in bytes of the entries visible through this matrix.
  std::size_t byte_size() const {
    return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_) *
           sizeof(double);
  }

 private:
  std::shared_ptr<const Eigen::MatrixXd> storage_;
  Index offset_ = 0;
  Index rows_ = 0;
  Index cols_ = 0;
};

/// Data of the ℓ0-constrained ridge regression
///
///   Q(w) = ½‖b − Aw‖² + (nλ/2)‖w − w̄‖²   s.t. ‖w‖₀ ≤ k,
///
/// with b = A·w̄ − α·e. Immutable once built.
class ProblemInstance {
 public:
  const GradientMatrix& A() const { return A_; }
  const Vector& wbar() const { return wbar_; }
  const Vector& b() const { return b_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  Index k() const { return k_; }
  Index n() const { return A_.rows(); }
  Index p() const { return A_.cols(); }
  /// The ridge weight nλ.
  double ridge() const { return static_cast<double>(n()) * lambda_; }
  /// Constant added to Q. Zero except for column-restricted instances, where
  /// it carries the ridge contribution of the dropped coordinates.
  double offset() const { return offset_; }

  /// Same data with a different nonzero budget.
  ProblemInstance with_k(Index k) const;

 private:
  friend ProblemInstance build_problem(GradientMatrix, Vector, double, Index,
                                       double);
  friend ProblemInstance restrict_columns(const ProblemInstance&,
                                          std::span<const Index>);

  GradientMatrix A_;
  Vector wbar_;
  Vector b_;
  double lambda_ = 0.0;
  double alpha_ = 1.0;
  Index k_ = 1;
  double offset_ = 0.0;
};

/// Builds the instance with b = A·w̄ − α·e.
ProblemInstance build_problem(GradientMatrix A, Vector wbar, double lambda,
                              Index k, double alpha = 1.0);

/// The instance seen by a vector supported on `columns` (ascending): A and w̄
/// are restricted, b is kept, and the dropped ridge terms move into offset(),
/// so Q of the restricted vector equals Q of its zero-padded embedding.
ProblemInstance restrict_columns(const ProblemInstance& inst,
                                 std::span<const Index> columns);

/// Q(w). O(np), or O(n·nnz(w)) for sparse w.
double objective(const ProblemInstance& inst, const Vector& w);

/// ∇Q(w) = A⊤(Aw − b) + nλ(w − w̄).
Vector gradient(const ProblemInstance& inst, const Vector& w);

/// b − Aw.
Vector residual(const ProblemInstance& inst, const Vector& w);

/// Q evaluated from a precomputed residual r = b − Aw.
double objective_from_residual(const ProblemInstance& inst, const Vector& w,
                               const Vector& r);

/// Ascending indices of the nonzero entries of w.
IndexSet support_of(const Vector& w);

/// A feasible point together with its support and cached objective.
struct SparseSolution {
  Vector weights;
  IndexSet support;
  double objective = 0.0;
  /// Objective after each outer iteration, starting from the projected start.
  std::vector<double> trace;
  int iterations = 0;

  static SparseSolution from_weights(const ProblemInstance& inst, Vector w);
};

/// Scatters `values` (one per entry of `indices`) into a length-p vector.
Vector embed(Index p, std::span<const Index> indices, const Vector& values);

/// Gathers the listed entries of x.
Vector gather(const Vector& x, std::span<const Index> indices);

void check_finite(const Vector& v, const char* what);

}  // namespace chita
