#pragma once

#include "chita/backsolve.hpp"

#include <functional>

namespace chita {

/// Contiguous parameter range [begin, begin + size).
struct Block {
  Index begin = 0;
  Index size = 0;
};

/// Disjoint cover of 0..p-1 by contiguous blocks with per-block budgets.
struct BlockPartition {
  std::vector<Block> blocks;
  /// Empty until allocate_sparsity runs.
  std::vector<Index> budgets;

  Index total_size() const;
  Index total_budget() const;
  /// Throws InvalidArgument unless blocks are contiguous, disjoint and cover
  /// 0..p-1, and budgets (when set) fit their blocks.
  void validate(Index p) const;
};

/// Splits every layer into ceil(size/cap) contiguous blocks whose sizes
/// differ by at most one. Blocks never straddle layers.
BlockPartition partition_layers(std::span<const Index> layer_sizes,
                                Index block_size_cap);

/// Chooses per-block budgets from a start point. Must return one budget per
/// block.
using SparsityAllocator = std::function<std::vector<Index>(
    const Vector& w0, Index k, const BlockPartition& partition)>;

/// k_i = |supp(P_k(w0)) ∩ B_i|.
std::vector<Index> magnitude_allocation(const Vector& w0, Index k,
                                        const BlockPartition& partition);

/// Returns a copy of `partition` with budgets set by `allocator`.
BlockPartition allocate_sparsity(const Vector& w0, Index k,
                                 const BlockPartition& partition,
                                 const SparsityAllocator& allocator = magnitude_allocation);

struct BlockwiseOptions {
  SolverConfig solver{};
  BacksolveOptions backsolve{};
  ActiveSetOptions active{};
  /// Solve order; empty means ascending block index. Output does not
  /// depend on it.
  std::vector<std::size_t> order;
};

/// Solves each block's sub-problem (b_i = A_{B_i} w̄_{B_i} − αe) with
/// CHITA-BSO under budget k_i and concatenates the results. Blocks with
/// k_i = 0 are zero; blocks with k_i = |B_i| get the exact restricted solve.
/// Blocks run in parallel and write disjoint ranges.
///
/// The returned objective is Q of the full problem; trace tracks the sum of
/// block sub-objectives as blocks finish.
SparseSolution solve_blockwise(const GradientMatrix& A, const Vector& wbar,
                               double lambda, double alpha,
                               const BlockPartition& partition,
                               const BlockwiseOptions& opts);

SparseSolution solve_blockwise(const GradientMatrix& A, const Vector& wbar,
                               double lambda, double alpha,
                               const BlockPartition& partition, int t_ht);

}  // namespace chita
