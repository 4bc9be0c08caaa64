#include "helpers.hpp"

#include "chita/blockwise.hpp"
#include "chita/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>

using namespace chita;
using namespace testing;

namespace {

std::vector<Index> sizes_of(const BlockPartition& part) {
  std::vector<Index> out;
  for (const Block& b : part.blocks) out.push_back(b.size);
  return out;
}

BlockPartition equal_blocks(Index p, Index count) {
  const std::vector<Index> layers(static_cast<std::size_t>(count), p / count);
  return partition_layers(layers, p);
}

ProblemInstance block_instance(const Eigen::MatrixXd& A, const Vector& wbar,
                               double lambda, double alpha, const Block& b,
                               Index k) {
  return build_problem(GradientMatrix(A.middleCols(b.begin, b.size)),
                       wbar.segment(b.begin, b.size), lambda, std::max<Index>(k, 1),
                       alpha);
}

}  // namespace

TEST_CASE("partition_layers") {
  SUBCASE("layers within the cap are kept whole") {
    const std::vector<Index> layers = {5, 3};
    const BlockPartition part = partition_layers(layers, 10);
    REQUIRE(part.blocks.size() == 2);
    CHECK(part.blocks[0].begin == 0);
    CHECK(part.blocks[0].size == 5);
    CHECK(part.blocks[1].begin == 5);
    CHECK(part.blocks[1].size == 3);
    CHECK(part.budgets.empty());
  }
  SUBCASE("near-equal split") {
    const std::vector<Index> layers = {10};
    CHECK(sizes_of(partition_layers(layers, 4)) == std::vector<Index>{4, 3, 3});
  }
  SUBCASE("default block size") {
    const std::vector<Index> layers = {10000, 250};
    CHECK(sizes_of(partition_layers(layers, 10000)) == std::vector<Index>{10000, 250});
  }
  SUBCASE("blocks never straddle layers and respect the cap") {
    const std::vector<Index> layers = {7, 23, 1, 16};
    const BlockPartition part = partition_layers(layers, 6);
    part.validate(47);
    Index layer_start = 0;
    std::vector<Index> starts;
    for (Index s : layers) {
      starts.push_back(layer_start);
      layer_start += s;
    }
    starts.push_back(layer_start);
    for (const Block& b : part.blocks) {
      CHECK(b.size <= 6);
      auto it = std::upper_bound(starts.begin(), starts.end(), b.begin);
      CHECK(b.begin + b.size <= *it);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(partition_layers(std::vector<Index>{}, 4), InvalidArgument);
    CHECK_THROWS_AS(partition_layers(std::vector<Index>{3}, 0), InvalidArgument);
    CHECK_THROWS_AS(partition_layers(std::vector<Index>{3, 0}, 4), InvalidArgument);
  }
}

TEST_CASE("allocate_sparsity") {
  const BlockPartition part = equal_blocks(30, 3);
  SUBCASE("large entries concentrated in one block") {
    Vector w0 = Vector::Constant(30, 0.01);
    for (Index i = 0; i < 10; ++i) w0[i] = 5.0 + static_cast<double>(i);
    CHECK(allocate_sparsity(w0, 6, part).budgets == std::vector<Index>{6, 0, 0});
  }
  SUBCASE("zero start") {
    CHECK(allocate_sparsity(Vector::Zero(30), 6, part).budgets == std::vector<Index>{0, 0, 0});
  }
  SUBCASE("random start matches the sort oracle") {
    const Vector w0 = oracles::gaussian_vector(30, 18);
    const IndexSet kept = oracles::sort_topk(w0, 9);
    std::vector<Index> expect(3, 0);
    for (Index i : kept) ++expect[static_cast<std::size_t>(i / 10)];
    const BlockPartition got = allocate_sparsity(w0, 9, part);
    CHECK(got.budgets == expect);
    CHECK(got.total_budget() == 9);
  }
  SUBCASE("pluggable allocator") {
    const SparsityAllocator even = [](const Vector&, Index k, const BlockPartition& p) {
      return std::vector<Index>(p.blocks.size(), k / static_cast<Index>(p.blocks.size()));
    };
    CHECK(allocate_sparsity(Vector::Ones(30), 9, part, even).budgets == std::vector<Index>{3, 3, 3});
    const SparsityAllocator greedy = [](const Vector&, Index k, const BlockPartition& p) {
      return std::vector<Index>(p.blocks.size(), k);
    };
    CHECK_THROWS_AS(allocate_sparsity(Vector::Ones(30), 9, part, greedy), InvalidArgument);
  }
}

TEST_CASE("solve_blockwise") {
  SUBCASE("one block is chita_bso") {
    auto pr = random_pair(8, 30, 0.05, 7, 21);
    BlockPartition part = allocate_sparsity(pr.inst.wbar(), 7, equal_blocks(30, 1));
    const SparseSolution blk = solve_blockwise(pr.inst.A(), pr.inst.wbar(), 0.05, 1.0, part, 5);
    const SparseSolution full = chita_bso(pr.inst, pr.inst.wbar(), 7, 5);
    CHECK(blk.weights == full.weights);
    CHECK(blk.objective == full.objective);
  }

  SUBCASE("block-orthogonal columns decompose exactly") {
    // Block 0 lives on rows 0..3, block 1 on rows 4..7.
    const Index n = 8, half = 6, p = 2 * half, k = 4;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, p);
    A.block(0, 0, 4, half) = oracles::gaussian_matrix(4, half, 19);
    A.block(4, half, 4, half) = oracles::gaussian_matrix(4, half, 19 + 1);
    const Vector wbar = oracles::gaussian_vector(p, 19 + 2);
    const double lambda = 0.5;
    auto pr = pair_from(A, wbar, lambda, k);

    const BlockPartition part = allocate_sparsity(wbar, k, equal_blocks(p, 2));
    const SparseSolution blk = solve_blockwise(pr.inst.A(), wbar, lambda, 1.0, part, 20);
    const SparseSolution full = chita_bso(pr.inst, wbar, k, 20);
    CHECK(blk.objective == doctest::Approx(full.objective).epsilon(1e-8));
    CHECK(blk.support == full.support);
  }

  SUBCASE("each block is stationary on its support") {
    const Index n = 8, p = 40, k = 10;
    const Eigen::MatrixXd A = oracles::gaussian_matrix(n, p, 20);
    const Vector wbar = oracles::gaussian_vector(p, 20 + 1);
    const double lambda = 0.05;
    const BlockPartition part = allocate_sparsity(wbar, k, equal_blocks(p, 4));
    const SparseSolution s = solve_blockwise(GradientMatrix(A), wbar, lambda, 1.0, part, 5);
    CHECK(nnz(s.weights) == part.total_budget());
    for (std::size_t i = 0; i < part.blocks.size(); ++i) {
      const Block& b = part.blocks[i];
      if (part.budgets[i] == 0) continue;
      const auto sub = oracles::make_quadratic(A.middleCols(b.begin, b.size),
                                               wbar.segment(b.begin, b.size), lambda);
      const Vector wb = s.weights.segment(b.begin, b.size);
      const IndexSet S = support_of(wb);
      CHECK(static_cast<Index>(S.size()) == part.budgets[i]);
      const Vector g = gather(oracles::naive_gradient(sub, wb), S);
      const Vector g0 = gather(oracles::naive_gradient(sub, sub.wbar), S);
      CHECK(g.norm() <= 1e-8 * g0.norm());
    }
  }

  SUBCASE("zero and full budgets") {
    const Index n = 6, p = 12;
    const Eigen::MatrixXd A = oracles::gaussian_matrix(n, p, 22);
    const Vector wbar = oracles::gaussian_vector(p, 23);
    BlockPartition part = equal_blocks(p, 3);
    part.budgets = {0, 4, 2};
    const SparseSolution s = solve_blockwise(GradientMatrix(A), wbar, 0.1, 1.0, part, 5);
    CHECK(s.weights.segment(0, 4).isZero(0.0));
    const auto sub = oracles::make_quadratic(A.middleCols(4, 4), wbar.segment(4, 4), 0.1);
    const IndexSet all = {0, 1, 2, 3};
    CHECK((s.weights.segment(4, 4) - oracles::dense_restricted_solve(sub, all)).norm() < 1e-10);
    CHECK(nnz(s.weights) == 6);
  }

  SUBCASE("errors") {
    auto pr = random_pair(4, 10, 0.1, 3, 24);
    BlockPartition part = equal_blocks(10, 2);
    CHECK_THROWS_AS(solve_blockwise(pr.inst.A(), pr.inst.wbar(), 0.1, 1.0, part, 5), InvalidArgument);
    part.budgets = {2, 1};
    CHECK_THROWS_AS(solve_blockwise(pr.inst.A(), pr.inst.wbar(), 0.0, 1.0, part, 5), InvalidArgument);
    part.budgets = {6, 1};
    CHECK_THROWS_AS(solve_blockwise(pr.inst.A(), pr.inst.wbar(), 0.1, 1.0, part, 5), InvalidArgument);
  }
}

TEST_CASE("blockwise properties") {
  const Index n = 10, p = 120, k = 30;
  const Eigen::MatrixXd A = oracles::gaussian_matrix(n, p, 25);
  const Vector wbar = oracles::gaussian_vector(p, 26);
  const double lambda = 0.02, alpha = 0.5;
  const std::vector<Index> layers = {50, 40, 30};
  const BlockPartition part = allocate_sparsity(wbar, k, partition_layers(layers, 20));
  BlockwiseOptions opts;
  const SparseSolution base = solve_blockwise(GradientMatrix(A), wbar, lambda, alpha, part, opts);

  SUBCASE("feasible") {
    CHECK(nnz(base.weights) == part.total_budget());
    CHECK(part.total_budget() <= k);
  }
  SUBCASE("solve order and thread count do not change the output") {
    BlockwiseOptions shuffled = opts;
    shuffled.order.resize(part.blocks.size());
    std::iota(shuffled.order.begin(), shuffled.order.end(), std::size_t{0});
    std::mt19937_64 rng(27);
    std::shuffle(shuffled.order.begin(), shuffled.order.end(), rng);
    const int threads = omp_get_max_threads();
    for (int t : {1, 3}) {
      omp_set_num_threads(t);
      const SparseSolution other = solve_blockwise(GradientMatrix(A), wbar, lambda, alpha, part, shuffled);
      CHECK(other.weights == base.weights);
      CHECK(other.objective == base.objective);
    }
    omp_set_num_threads(threads);
  }
  SUBCASE("each block beats magnitude pruning of that block") {
    for (std::size_t i = 0; i < part.blocks.size(); ++i) {
      const Block& b = part.blocks[i];
      const Index ki = part.budgets[i];
      if (ki == 0) continue;
      const ProblemInstance sub = block_instance(A, wbar, lambda, alpha, b, ki);
      const double solved = objective(sub, base.weights.segment(b.begin, b.size));
      const double magnitude = objective(sub, kernels::hard_threshold(sub.wbar(), ki));
      CHECK(solved <= magnitude);
    }
  }
  SUBCASE("trace is the non-increasing sum of block objectives") {
    CHECK(base.trace.size() == part.blocks.size() + 1);
    CHECK(non_increasing(base.trace));
    double sum = 0.0;
    for (std::size_t i = 0; i < part.blocks.size(); ++i) {
      const Block& b = part.blocks[i];
      const ProblemInstance sub = block_instance(A, wbar, lambda, alpha, b, part.budgets[i]);
      sum += objective(sub, base.weights.segment(b.begin, b.size));
    }
    CHECK(base.trace.back() == doctest::Approx(sum).epsilon(1e-10));
  }
}
