#pragma once

// Straightforward reference computations used to check the solvers. Nothing
// here calls into the library's numerical code: products are explicit loops,
// selections are full sorts, solves are dense factorizations.

#include "chita/fisher.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace chita::oracles {

using Matrix = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Indices = std::vector<Eigen::Index>;

/// Matrix with i.i.d. standard normal entries.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);
Vec gaussian_vector(Eigen::Index len, std::uint64_t seed);

/// Raw data of a least-squares ridge instance, kept apart from ProblemInstance.
struct Quadratic {
  Matrix A;
  Vec wbar;
  double lambda = 0.0;
  double alpha = 1.0;
  Vec b;  // filled by make_quadratic

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index p() const { return A.cols(); }
};

Quadratic make_quadratic(Matrix A, Vec wbar, double lambda, double alpha = 1.0);

/// A·x with explicit row-dot-product loops.
Vec naive_matvec(const Matrix& A, const Vec& x);
/// A⊤·r with explicit loops.
Vec naive_rmatvec(const Matrix& A, const Vec& r);
/// Q(w) summed term by term.
double naive_objective(const Quadratic& q, const Vec& w);
/// Exact gradient written out per coordinate.
Vec naive_gradient(const Quadratic& q, const Vec& w);

/// Central differences of f at x with step h.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h);

/// Max over i of |a_i − b_i| / max(|b_i|, floor).
double max_rel_error(const Vec& a, const Vec& b, double floor = 1e-8);

/// k largest |x_i| by a stable full sort (ties to the smaller index), ascending.
Indices sort_topk(const Vec& x, Eigen::Index k);
Vec sort_threshold(const Vec& x, Eigen::Index k);

/// Minimiser of Q over {supp(w) ⊆ S}: dense |S|×|S| solve of
/// (nλI + A_S⊤A_S) w_S = nλw̄_S + A_S⊤b. Uses a pseudo-inverse when singular.
Vec dense_restricted_solve(const Quadratic& q, const Indices& S);

struct SubsetOptimum {
  double objective = 0.0;
  Indices support;
  Vec w;
  std::size_t supports_checked = 0;
};

/// Global optimum of Q under ‖w‖₀ ≤ k by enumerating every size-k support.
SubsetOptimum best_subset(const Quadratic& q, Eigen::Index k);

/// Minimiser of a unimodal f on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol = 1e-12);

/// Vertex of the parabola through f(x − h), f(x), f(x + h). Exact for
/// quadratics up to rounding; used to polish a golden-section result, whose
/// accuracy is limited to about √ε by flat function values.
double parabolic_vertex(const std::function<double(double)>& f, double x, double h);

/// Largest singular value squared, from a full SVD.
double svd_sigma_max_sq(const Matrix& A);

/// Per-sample loss ℓ_i(w) = ½ Σ_j d_j (w_j − c_ij)², so the Hessian of the mean
/// loss is diag(d) exactly.
class DiagonalQuadraticOracle final : public GradientOracle {
 public:
  DiagonalQuadraticOracle(Vec curvature, Matrix centres);
  static DiagonalQuadraticOracle random(Eigen::Index dim, Eigen::Index samples,
                                        std::uint64_t seed);

  Index dataset_size() const override { return centres_.cols(); }
  Index dim() const override { return curvature_.size(); }
  double loss(const Vector& w, std::span<const Index> batch) const override;
  Vector gradient(const Vector& w, std::span<const Index> batch) const override;
  double hessian_trace() const { return curvature_.sum(); }

 private:
  Vec curvature_;
  Matrix centres_;  // dim × samples
};

}  // namespace chita::oracles
