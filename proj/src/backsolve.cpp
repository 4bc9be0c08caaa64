#include "chita/backsolve.hpp"

#include "chita/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace chita {

SparseSolution restricted_exact_solve(const ProblemInstance& inst,
                                      const IndexSet& support,
                                      const BacksolveOptions& opts) {
  if (support.empty()) throw InvalidArgument("restricted_exact_solve: empty support");
  for (std::size_t t = 0; t < support.size(); ++t) {
    if (support[t] < 0 || support[t] >= inst.p() ||
        (t > 0 && support[t] <= support[t - 1])) {
      throw InvalidArgument("restricted_exact_solve: support must be ascending and in range");
    }
  }
  const Index n = inst.n();
  const Index s = static_cast<Index>(support.size());
  const GradientMatrix As = inst.A().gather(support);
  const auto Av = As.view();
  const Vector wbar_s = gather(inst.wbar(), support);
  Vector w_s;

  if (inst.lambda() > 0.0) {
    const double ridge = inst.ridge();
    Vector c = ridge * wbar_s;
    c.noalias() += Av.transpose() * inst.b();

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) * ridge;
    M.selfadjointView<Eigen::Lower>().rankUpdate(Av);
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(M);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("restricted_exact_solve: n×n factorisation failed");
    }
    const Vector z = llt.solve(Av * c);
    w_s = c;
    w_s.noalias() -= Av.transpose() * z;
    w_s /= ridge;
  } else {
    if (s > opts.dense_limit) {
      throw UnsupportedConfiguration(
          "restricted_exact_solve: lambda = 0 needs a dense solve and |S| = " +
          std::to_string(s) + " exceeds the limit " + std::to_string(opts.dense_limit));
    }
    // Minimum-norm least squares; the minimiser is not unique when |S| > rank.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Av);
    w_s = cod.solve(inst.b());
  }

  return SparseSolution::from_weights(inst, embed(inst.p(), support, w_s));
}

SparseSolution chita_bso(const ProblemInstance& inst, const Vector& w0, Index k,
                         const SolverConfig& cfg, const BacksolveOptions& opts,
                         const ActiveSetOptions& active_opts) {
  SolverConfig discovery = cfg;
  discovery.t_cd = 0;
  const IndexSet active0 = init_active_set(w0, k, opts.active_mult);
  SparseSolution found = chita_cd(inst, w0, k, discovery, active0, active_opts);
  if (found.support.empty()) return found;

  SparseSolution exact = restricted_exact_solve(inst, found.support, opts);
  if (exact.objective > found.objective) return found;
  exact.trace = std::move(found.trace);
  exact.trace.push_back(exact.objective);
  exact.iterations = found.iterations;
  return exact;
}

SparseSolution chita_bso(const ProblemInstance& inst, const Vector& w0, Index k,
                         int t_ht) {
  SolverConfig cfg;
  cfg.t_ht = t_ht;
  return chita_bso(inst, w0, k, cfg);
}

}  // namespace chita
