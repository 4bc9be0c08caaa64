#include "helpers.hpp"

#include "chita/activeset.hpp"
#include "chita/kernels.hpp"

#include <algorithm>

using namespace chita;
using namespace testing;

namespace {

bool subset_of(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

IndexSet all_indices(Index p) {
  IndexSet out(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

}  // namespace

TEST_CASE("init_active_set") {
  const Vector w0 = oracles::gaussian_vector(20, 13);
  SUBCASE("mult 1 is the magnitude support") {
    CHECK(init_active_set(w0, 5, 1.0) == kernels::topk_indices(w0, 5));
  }
  SUBCASE("clamped to all indices") {
    CHECK(init_active_set(w0, 8, 3.0) == all_indices(20));
    CHECK(init_active_set(w0, 20, 1.0) == all_indices(20));
  }
  SUBCASE("eight largest magnitudes for k = 4, mult = 2") {
    CHECK(init_active_set(w0, 4, 2.0) == oracles::sort_topk(w0, 8));
  }
  SUBCASE("fractional multiple rounds up") {
    CHECK(init_active_set(w0, 3, 1.5).size() == 5);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(init_active_set(w0, 0, 2.0), InvalidArgument);
    CHECK_THROWS_AS(init_active_set(w0, 21, 2.0), InvalidArgument);
    CHECK_THROWS_AS(init_active_set(w0, 4, 0.5), InvalidArgument);
  }
}

TEST_CASE("chita_cd") {
  SolverConfig cfg;

  SUBCASE("full active set matches iht_cd") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto pr = random_pair(10, 30, 0.05, 6, 100 + seed);
      const Vector w0 = pr.inst.wbar();
      const SparseSolution a = chita_cd(pr.inst, w0, 6, cfg, all_indices(30));
      const SparseSolution b = iht_cd(pr.inst, w0, 6, cfg);
      CHECK(a.weights == b.weights);
      CHECK(a.objective == b.objective);
    }
  }

  SUBCASE("optimum inside the initial set: no escape") {
    const Index p = 16, k = 3;
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> scale(1.0, 2.0);
    Vector a(p);
    for (Index i = 0; i < p; ++i) a[i] = scale(rng);
    const Vector wbar = oracles::gaussian_vector(p, 14 + 1);
    const double lambda = 0.05, alpha = 0.1;
    Eigen::MatrixXd A = a.asDiagonal();
    auto inst = build_problem(GradientMatrix(A), wbar, lambda, k, alpha);

    const IndexSet active0 = init_active_set(wbar, k, 2.0);
    const IndexSet best = separable_optimum(a, wbar, lambda, alpha, k);
    REQUIRE(subset_of(best, active0));

    ActiveSetOptions no_probe;
    no_probe.probe = false;
    const SparseSolution probed = chita_cd(inst, wbar, k, cfg, active0);
    const SparseSolution restricted = chita_cd(inst, wbar, k, cfg, active0, no_probe);
    CHECK(probed.weights == restricted.weights);
    CHECK(probed.support == best);
  }

  SUBCASE("dominant column outside the initial set is found") {
    const Index p = 16, k = 3, star = 15;
    const double lambda = 0.01, alpha = 1.0;
    // Large w̄ with b_i = w̄_i − α small: these fill the initial set but gain
    // little. The doubled star column with w̄ ≈ 0 has the largest gain and
    // the largest off-support gradient.
    Vector a = Vector::Ones(p);
    a[star] = 2.0;
    Vector wbar = Vector::Constant(p, 0.5);
    for (Index i = 0; i < 6; ++i) wbar[i] = 1.1 + 0.1 * static_cast<double>(i);
    wbar[star] = 0.01;
    const Eigen::MatrixXd A = a.asDiagonal();
    auto inst = build_problem(GradientMatrix(A), wbar, lambda, k, alpha);

    const IndexSet active0 = init_active_set(wbar, k, 2.0);
    REQUIRE(!std::binary_search(active0.begin(), active0.end(), star));
    const IndexSet best = separable_optimum(a, wbar, lambda, alpha, k);
    REQUIRE(std::binary_search(best.begin(), best.end(), star));

    ActiveSetOptions no_probe;
    no_probe.probe = false;
    const SparseSolution probed = chita_cd(inst, wbar, k, cfg, active0);
    const SparseSolution restricted = chita_cd(inst, wbar, k, cfg, active0, no_probe);
    CHECK(probed.support == best);
    CHECK(probed.objective < restricted.objective);
    const auto exact = oracles::best_subset(oracles::make_quadratic(A, wbar, lambda, alpha), k);
    CHECK(probed.objective == doctest::Approx(exact.objective).epsilon(1e-9));
  }

  SUBCASE("active set smaller than k is rejected") {
    auto pr = random_pair(4, 10, 0.1, 3, 3);
    CHECK_THROWS_AS(chita_cd(pr.inst, pr.inst.wbar(), 3, cfg, {0, 1}), InvalidArgument);
    CHECK_THROWS_AS(chita_cd(pr.inst, pr.inst.wbar(), 3, cfg, {0, 1, 10}), InvalidArgument);
  }
}

TEST_CASE("chita_cd properties over random instances") {
  SolverConfig cfg;
  ActiveSetOptions no_probe;
  no_probe.probe = false;
  int escapes = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index n = 6 + static_cast<Index>(seed % 5), p = 40, k = 5;
    auto pr = random_pair(n, p, 0.02, k, 200 + seed);
    const Vector w0 = pr.inst.wbar();
    const IndexSet active0 = init_active_set(w0, k, 2.0);
    const SparseSolution s = chita_cd(pr.inst, w0, k, cfg, active0);
    const SparseSolution r = chita_cd(pr.inst, w0, k, cfg, active0, no_probe);

    CHECK(nnz(s.weights) <= k);
    CHECK(non_increasing(s.trace));
    CHECK(s.objective <= r.objective + 1e-12 * std::abs(r.objective));
    CHECK(s.objective == doctest::Approx(oracles::naive_objective(pr.quad, s.weights)).epsilon(1e-10));
    if (!subset_of(s.support, active0)) ++escapes;
  }
  // The probe has something to do on these instances.
  CHECK(escapes > 0);
}
