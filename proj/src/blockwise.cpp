#include "chita/blockwise.hpp"

#include "chita/kernels.hpp"

#include <exception>
#include <numeric>

namespace chita {

Index BlockPartition::total_size() const {
  Index s = 0;
  for (const Block& b : blocks) s += b.size;
  return s;
}

Index BlockPartition::total_budget() const {
  return std::accumulate(budgets.begin(), budgets.end(), Index{0});
}

void BlockPartition::validate(Index p) const {
  Index next = 0;
  for (const Block& b : blocks) {
    if (b.begin != next || b.size < 1) {
      throw InvalidArgument("block partition is not a contiguous disjoint cover");
    }
    next += b.size;
  }
  if (next != p) throw InvalidArgument("block partition does not cover all coordinates");
  if (!budgets.empty()) {
    if (budgets.size() != blocks.size()) throw InvalidArgument("one budget per block required");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (budgets[i] < 0 || budgets[i] > blocks[i].size) {
        throw InvalidArgument("block budget out of range");
      }
    }
  }
}

BlockPartition partition_layers(std::span<const Index> layer_sizes,
                                Index block_size_cap) {
  if (layer_sizes.empty()) throw InvalidArgument("partition_layers: no layers");
  if (block_size_cap < 1) throw InvalidArgument("partition_layers: cap must be >= 1");
  BlockPartition part;
  Index offset = 0;
  for (Index size : layer_sizes) {
    if (size < 1) throw InvalidArgument("partition_layers: empty layer");
    const Index pieces = (size + block_size_cap - 1) / block_size_cap;
    const Index base = size / pieces;
    const Index extra = size % pieces;
    for (Index t = 0; t < pieces; ++t) {
      const Index len = base + (t < extra ? 1 : 0);
      part.blocks.push_back({offset, len});
      offset += len;
    }
  }
  return part;
}

std::vector<Index> magnitude_allocation(const Vector& w0, Index k,
                                        const BlockPartition& partition) {
  const Vector pruned = kernels::hard_threshold(w0, k);
  std::vector<Index> budgets;
  budgets.reserve(partition.blocks.size());
  for (const Block& b : partition.blocks) {
    Index count = 0;
    for (Index i = b.begin; i < b.begin + b.size; ++i) count += pruned[i] != 0.0;
    budgets.push_back(count);
  }
  return budgets;
}

BlockPartition allocate_sparsity(const Vector& w0, Index k,
                                 const BlockPartition& partition,
                                 const SparsityAllocator& allocator) {
  partition.validate(w0.size());
  if (k < 1 || k > w0.size()) throw InvalidArgument("allocate_sparsity: k out of range");
  BlockPartition out = partition;
  out.budgets = allocator(w0, k, partition);
  out.validate(w0.size());
  if (out.total_budget() > k) throw InvalidArgument("allocator exceeded the budget k");
  return out;
}

SparseSolution solve_blockwise(const GradientMatrix& A, const Vector& wbar,
                               double lambda, double alpha,
                               const BlockPartition& partition,
                               const BlockwiseOptions& opts) {
  const Index p = A.cols();
  if (wbar.size() != p) throw InvalidArgument("solve_blockwise: wbar has wrong length");
  partition.validate(p);
  if (partition.budgets.empty()) throw InvalidArgument("solve_blockwise: budgets not set");
  if (!(lambda > 0.0)) throw InvalidArgument("solve_blockwise: lambda must be > 0");

  const std::size_t count = partition.blocks.size();
  std::vector<std::size_t> order = opts.order;
  if (order.empty()) {
    order.resize(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  if (order.size() != count) throw InvalidArgument("solve_blockwise: bad block order");

  Vector w = Vector::Zero(p);
  std::vector<double> start(count, 0.0);
  std::vector<double> final_value(count, 0.0);
  std::vector<int> iterations(count, 0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < count; ++t) {
    try {
      const std::size_t i = order[t];
      const Block& blk = partition.blocks[i];
      const Index budget = partition.budgets[i];
      const ProblemInstance sub =
          build_problem(A.column_window(blk.begin, blk.size),
                        wbar.segment(blk.begin, blk.size), lambda,
                        std::max<Index>(budget, 1), alpha);
      if (budget == 0) {
        start[i] = final_value[i] = objective(sub, Vector::Zero(blk.size));
        continue;
      }
      start[i] = objective(sub, kernels::hard_threshold(sub.wbar(), budget));
      SparseSolution s;
      if (budget == blk.size) {
        IndexSet all(static_cast<std::size_t>(blk.size));
        std::iota(all.begin(), all.end(), Index{0});
        s = restricted_exact_solve(sub, all, opts.backsolve);
      } else {
        s = chita_bso(sub, sub.wbar(), budget, opts.solver, opts.backsolve, opts.active);
      }
      w.segment(blk.begin, blk.size) = s.weights;
      final_value[i] = s.objective;
      iterations[i] = s.iterations;
    } catch (...) {
#pragma omp critical(chita_blockwise_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const ProblemInstance full = build_problem(A, wbar, lambda, std::max<Index>(partition.total_budget(), 1), alpha);
  SparseSolution sol = SparseSolution::from_weights(full, std::move(w));
  double surrogate = std::accumulate(start.begin(), start.end(), 0.0);
  sol.trace.push_back(surrogate);
  for (std::size_t i = 0; i < count; ++i) {
    surrogate += final_value[i] - start[i];
    sol.trace.push_back(surrogate);
    sol.iterations += iterations[i];
  }
  return sol;
}

SparseSolution solve_blockwise(const GradientMatrix& A, const Vector& wbar,
                               double lambda, double alpha,
                               const BlockPartition& partition, int t_ht) {
  BlockwiseOptions opts;
  opts.solver.t_ht = t_ht;
  return solve_blockwise(A, wbar, lambda, alpha, partition, opts);
}

}  // namespace chita
