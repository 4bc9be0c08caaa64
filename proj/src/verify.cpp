#include "chita/verify.hpp"

#include "chita/backsolve.hpp"
#include "chita/kernels.hpp"
#include "chita/linesearch.hpp"
#include "chita/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace chita::verify {
namespace {

using oracles::Quadratic;

struct Case {
  ProblemInstance inst;
  Quadratic quad;
};

Case make_case(Index n, Index p, double lambda, Index k, std::uint64_t seed,
               double alpha = 1.0) {
  Eigen::MatrixXd A = oracles::gaussian_matrix(n, p, seed);
  Vector wbar = oracles::gaussian_vector(p, seed ^ 0x5bd1e995ULL);
  Quadratic q = oracles::make_quadratic(A, wbar, lambda, alpha);
  return {build_problem(GradientMatrix(std::move(A)), std::move(wbar), lambda, k, alpha),
          std::move(q)};
}

// Random values on a random k-subset.
Vector sparse_point(Index p, Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<Index> idx(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Vector w = Vector::Zero(p);
  for (Index t = 0; t < k; ++t) w[idx[static_cast<std::size_t>(t)]] = normal(rng);
  return w;
}

double rel_inf(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

Property check(std::string name, double measured, const std::string& relation,
               double bound) {
  Property p{std::move(name), measured, bound, relation, false};
  if (relation == "<") p.passed = measured < bound;
  else if (relation == "<=") p.passed = measured <= bound;
  else p.passed = measured >= bound;
  return p;
}

}  // namespace

bool Report::passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const Property& p) { return p.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"gradients", "linesearch", "woodbury",
                                                 "bruteforce"};
  return names;
}

Report gradients_suite(std::uint64_t seed) {
  Report r{"gradients", {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> rows(2, 10), cols(5, 50);
  std::uniform_real_distribution<double> loglam(-3.0, 0.0);
  double worst = 0.0;
  for (int c = 0; c < 10; ++c) {
    const Index n = rows(rng), p = cols(rng);
    const double lambda = c % 4 == 0 ? 0.0 : std::pow(10.0, loglam(rng));
    const Case cs = make_case(n, p, lambda, 1, rng());
    const auto f = [&](const Vector& x) { return oracles::naive_objective(cs.quad, x); };
    for (int t = 0; t < 20; ++t) {
      const Vector w = oracles::gaussian_vector(p, rng());
      worst = std::max(worst, rel_inf(gradient(cs.inst, w), oracles::fd_gradient(f, w, 1e-5)));
    }
  }
  r.properties.push_back(check("objective gradient vs central differences (max rel. error)",
                               worst, "<", 1e-6));

  BlobOptions b;
  b.samples = 64;
  b.input_dim = 8;
  b.classes = 3;
  b.seed = seed;
  const ToyMLP model(make_blobs(b), 10);
  std::uniform_int_distribution<Index> sample(0, 63);
  double net_worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Vector w = model.init_weights(rng());
    const Index i = sample(rng);
    const auto f = [&](const Vector& x) { return model.sample_loss(x, i); };
    const Vector fd = oracles::fd_gradient(f, w, 1e-5);
    net_worst = std::max(net_worst, (model.per_sample_gradient(w, i) - fd).norm() /
                                        std::max(fd.norm(), 1e-300));
  }
  r.properties.push_back(check("network backprop vs central differences (max rel. error)",
                               net_worst, "<", 1e-5));
  return r;
}

Report linesearch_suite(std::uint64_t seed) {
  Report r{"linesearch", {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> rows(3, 10), cols(8, 40);
  int unstable = 0, finite = 0;
  double worst_rise = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < 100; ++c) {
    const Index n = rows(rng), p = cols(rng);
    const Index k = std::uniform_int_distribution<Index>(1, p / 2)(rng);
    const double lambda = c % 3 == 0 ? 0.0 : 0.1;
    const Case cs = make_case(n, p, lambda, k, rng());
    const Vector w = sparse_point(p, k, rng);
    const Vector grad = gradient(cs.inst, w);

    const IndexSet S = kernels::topk_indices(w, k);
    const double tau_c = first_breakpoint(w, grad, S);
    if (std::isfinite(tau_c)) {
      ++finite;
      for (int t = 0; t < 64; ++t) {
        const double tau = 0.999 * tau_c * t / 63.0;
        if (oracles::sort_topk(w - tau * grad, k) != S) {
          ++unstable;
          break;
        }
      }
    }
    const double q0 = oracles::naive_objective(cs.quad, w);
    const StepsizeResult step = search_stepsize(cs.inst, w, grad, k);
    const Vector next = oracles::sort_threshold(w - step.step * grad, k);
    worst_rise = std::max(worst_rise, (oracles::naive_objective(cs.quad, next) - q0) /
                                          std::max(std::abs(q0), 1e-300));
  }
  r.properties.push_back(check("instances with a support change below the breakpoint",
                               unstable, "<=", 0.0));
  r.properties.push_back(check("instances with a finite breakpoint", finite, ">=", 50.0));
  r.properties.push_back(check("max relative objective change of the searched step",
                               worst_rise, "<=", 1e-12));
  return r;
}

Report woodbury_suite(std::uint64_t seed) {
  Report r{"woodbury", {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> rows(2, 30), size(1, 40);
  std::uniform_real_distribution<double> loglam(-4.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    const Index n = rows(rng), s = size(rng), p = s + 10;
    const double lambda = std::pow(10.0, loglam(rng));
    const Case cs = make_case(n, p, lambda, s, rng());
    IndexSet S = support_of(sparse_point(p, s, rng));
    const Vector got = restricted_exact_solve(cs.inst, S).weights;
    const Vector dense = oracles::dense_restricted_solve(cs.quad, S);
    worst = std::max(worst, (got - dense).norm() / std::max(dense.norm(), 1e-300));
  }
  r.properties.push_back(check("Woodbury vs dense restricted solve (max rel. error)", worst,
                               "<", 1e-8));
  return r;
}

Report bruteforce_suite(std::uint64_t seed, int instances) {
  Report r{"bruteforce", {}};
  constexpr Index n = 6, p = 12, k = 4;
  constexpr double lambda = 0.1;
  std::mt19937_64 rng(seed);
  int close = 0;
  for (int c = 0; c < instances; ++c) {
    const Case cs = make_case(n, p, lambda, k, rng());
    const double best = oracles::best_subset(cs.quad, k).objective;
    const double got = chita_bso(cs.inst, cs.inst.wbar(), k, SolverConfig{}).objective;
    if ((got - best) / std::abs(best) <= 0.05) ++close;
  }
  r.properties.push_back(check("fraction of Gaussian instances within 5% of the optimum",
                               static_cast<double>(close) / instances, ">=", 0.8));

  // Diagonal A with n = p: Q separates and the exact optimum is reachable.
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  double worst_gap = 0.0;
  for (int c = 0; c < 10; ++c) {
    Vector a(p);
    for (Index i = 0; i < p; ++i) a[i] = scale(rng);
    const Eigen::MatrixXd A = a.asDiagonal();
    const Vector wbar = oracles::gaussian_vector(p, rng());
    const Quadratic q = oracles::make_quadratic(A, wbar, lambda);
    const ProblemInstance inst = build_problem(GradientMatrix(A), wbar, lambda, k);
    const double best = oracles::best_subset(q, k).objective;
    const double got = chita_bso(inst, wbar, k, SolverConfig{}).objective;
    worst_gap = std::max(worst_gap, (got - best) / std::abs(best));
  }
  r.properties.push_back(check("max relative gap on diagonal instances", worst_gap, "<=", 1e-12));
  return r;
}

std::optional<Report> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "gradients") return gradients_suite(seed);
  if (name == "linesearch") return linesearch_suite(seed);
  if (name == "woodbury") return woodbury_suite(seed);
  if (name == "bruteforce") return bruteforce_suite(seed);
  return std::nullopt;
}

}  // namespace chita::verify
