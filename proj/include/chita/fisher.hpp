#pragma once

#include "chita/core.hpp"

#include <cstdint>
#include <string>

namespace chita {

/// Source of per-mini-batch loss values and gradients over a fixed dataset
/// of N samples. Implementations must allow concurrent const calls.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual Index dataset_size() const = 0;
  virtual Index dim() const = 0;

  /// Mean loss over the batch.
  virtual double loss(const Vector& w, std::span<const Index> batch) const = 0;
  /// Mean loss gradient over the batch.
  virtual Vector gradient(const Vector& w, std::span<const Index> batch) const = 0;

  /// L(w) over the whole dataset.
  double full_loss(const Vector& w) const;
  Vector full_gradient(const Vector& w) const;
};

/// Seeded Gaussian-blob classification data; features(:, i) is sample i.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int classes = 0;

  Index size() const { return features.cols(); }
  Index input_dim() const { return features.rows(); }
};

struct BlobOptions {
  Index samples = 2048;
  Index input_dim = 32;
  int classes = 4;
  /// Standard deviation of the class centres.
  double center_scale = 1.0;
  /// Standard deviation of per-sample noise around a centre.
  double noise = 1.0;
  std::uint64_t seed = 0;
};

Dataset make_blobs(const BlobOptions& opts);

struct LayerSpec {
  std::string name;
  Index length = 0;
};

struct TrainOptions {
  int epochs = 20;
  double learning_rate = 0.1;
  Index batch_size = 32;
  std::uint64_t seed = 0;
};

/// Two-layer rectifier network with softmax cross-entropy loss.
///
/// Parameters are flattened as fc1.weight (hidden×input, row-major),
/// fc1.bias, fc2.weight (classes×hidden, row-major), fc2.bias.
class ToyMLP final : public GradientOracle {
 public:
  ToyMLP(Dataset data, Index hidden);

  Index dataset_size() const override { return data_.size(); }
  Index dim() const override { return param_count(); }
  double loss(const Vector& w, std::span<const Index> batch) const override;
  Vector gradient(const Vector& w, std::span<const Index> batch) const override;

  Index input_dim() const { return input_; }
  Index hidden() const { return hidden_; }
  int classes() const { return classes_; }
  Index param_count() const;
  std::vector<LayerSpec> layer_map() const;
  const Dataset& data() const { return data_; }

  /// Loss of sample i.
  double sample_loss(const Vector& w, Index i) const;
  /// Exact gradient of the loss of sample i, by backpropagation.
  Vector per_sample_gradient(const Vector& w, Index i) const;
  /// Logits for sample i.
  Vector logits(const Vector& w, Index i) const;

  double accuracy(const Vector& w) const;

  /// Scaled uniform initialisation, seeded.
  Vector init_weights(std::uint64_t seed) const;

  /// Plain mini-batch gradient descent from w.
  Vector train(Vector w, const TrainOptions& opts) const;

 private:
  // Adds the gradient of sample i's loss to grad (if non-null); returns loss.
  double accumulate(const Vector& w, Index i, Vector* grad) const;

  Dataset data_;
  Index input_ = 0;
  Index hidden_ = 0;
  int classes_ = 0;
};

/// n disjoint batches of m sample indices drawn without replacement.
std::vector<std::vector<Index>> sample_batches(Index dataset_size, Index n,
                                               Index m, std::uint64_t seed);

struct FisherBuild {
  GradientMatrix A;
  /// First-order scale 1/m.
  double alpha = 1.0;
  std::vector<std::vector<Index>> batches;
};

/// Row i of A is the mean gradient at wbar over batch i of sample_batches.
FisherBuild build_fisher_matrix(const GradientOracle& oracle, const Vector& wbar,
                                Index n, Index m, std::uint64_t seed);

/// Thrown when the curvature estimate is not positive.
class IndeterminateCurvature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hutchinson estimate of Trace(∇²L(w)) with Rademacher probes; each
/// Hessian-vector product is a central difference of the full gradient with
/// ε = 1e-4·(1 + ‖w‖∞).
double hessian_trace_estimate(const GradientOracle& oracle, const Vector& w,
                              int probes, std::uint64_t seed);

/// α = Trace(H)/Trace(∇²L(w̄)) with Trace(H) = ‖A‖_F²/n.
double estimate_alpha_trace(const GradientOracle& oracle, const GradientMatrix& A,
                            const Vector& wbar, int probes, std::uint64_t seed);

/// Full-dataset mean loss.
double true_loss(const GradientOracle& oracle, const Vector& w);

/// Seeded blob dataset, a ToyMLP over it and weights trained from a seeded
/// initialisation. Training is deliberately short, so ∇L(w̄) ≠ 0.
struct ToyTaskOptions {
  BlobOptions data{2048, 32, 4, 0.5, 1.0, 0};
  Index hidden = 80;
  TrainOptions train{5, 0.1, 32, 0};
  std::uint64_t init_seed = 0;
};

struct ToyTask {
  ToyMLP model;
  Vector wbar;
};

ToyTask make_toy_task(const ToyTaskOptions& opts);

}  // namespace chita
