#include "chita/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace chita {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<Index> all_indices(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

}  // namespace

double GradientOracle::full_loss(const Vector& w) const {
  const auto idx = all_indices(dataset_size());
  return loss(w, idx);
}

Vector GradientOracle::full_gradient(const Vector& w) const {
  const auto idx = all_indices(dataset_size());
  return gradient(w, idx);
}

Dataset make_blobs(const BlobOptions& opts) {
  if (opts.samples < 1 || opts.input_dim < 1 || opts.classes < 2) {
    throw InvalidArgument("make_blobs: need samples >= 1, input_dim >= 1, classes >= 2");
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd centers(opts.input_dim, opts.classes);
  for (Index c = 0; c < centers.cols(); ++c) {
    for (Index r = 0; r < centers.rows(); ++r) centers(r, c) = opts.center_scale * normal(rng);
  }
  Dataset data;
  data.classes = opts.classes;
  data.features.resize(opts.input_dim, opts.samples);
  data.labels.resize(static_cast<std::size_t>(opts.samples));
  for (Index i = 0; i < opts.samples; ++i) {
    const int label = static_cast<int>(i % opts.classes);
    data.labels[static_cast<std::size_t>(i)] = label;
    for (Index r = 0; r < opts.input_dim; ++r) {
      data.features(r, i) = centers(r, label) + opts.noise * normal(rng);
    }
  }
  return data;
}

ToyMLP::ToyMLP(Dataset data, Index hidden)
    : data_(std::move(data)),
      input_(data_.input_dim()),
      hidden_(hidden),
      classes_(data_.classes) {
  if (hidden_ < 1 || input_ < 1 || classes_ < 2) {
    throw InvalidArgument("ToyMLP: invalid widths");
  }
  if (static_cast<Index>(data_.labels.size()) != data_.size()) {
    throw InvalidArgument("ToyMLP: label count does not match sample count");
  }
  for (int y : data_.labels) {
    if (y < 0 || y >= classes_) throw InvalidArgument("ToyMLP: label out of range");
  }
}

Index ToyMLP::param_count() const {
  return hidden_ * input_ + hidden_ + classes_ * hidden_ + classes_;
}

std::vector<LayerSpec> ToyMLP::layer_map() const {
  return {{"fc1.weight", hidden_ * input_},
          {"fc1.bias", hidden_},
          {"fc2.weight", classes_ * hidden_},
          {"fc2.bias", classes_}};
}

Vector ToyMLP::logits(const Vector& w, Index i) const {
  if (w.size() != param_count()) throw InvalidArgument("ToyMLP: weight length mismatch");
  const Index h = hidden_, d = input_, c = classes_;
  Eigen::Map<const RowMajor> W1(w.data(), h, d);
  Eigen::Map<const Vector> b1(w.data() + h * d, h);
  Eigen::Map<const RowMajor> W2(w.data() + h * d + h, c, h);
  Eigen::Map<const Vector> b2(w.data() + h * d + h + c * h, c);
  const Vector z1 = W1 * data_.features.col(i) + b1;
  return W2 * z1.cwiseMax(0.0) + b2;
}

double ToyMLP::accumulate(const Vector& w, Index i, Vector* grad) const {
  const Index h = hidden_, d = input_, c = classes_;
  Eigen::Map<const RowMajor> W1(w.data(), h, d);
  Eigen::Map<const Vector> b1(w.data() + h * d, h);
  Eigen::Map<const RowMajor> W2(w.data() + h * d + h, c, h);
  Eigen::Map<const Vector> b2(w.data() + h * d + h + c * h, c);
  const auto x = data_.features.col(i);
  const int y = data_.labels[static_cast<std::size_t>(i)];

  const Vector z1 = W1 * x + b1;
  const Vector a1 = z1.cwiseMax(0.0);
  const Vector z2 = W2 * a1 + b2;
  const double zmax = z2.maxCoeff();
  const Vector e = (z2.array() - zmax).exp().matrix();
  const double sum = e.sum();
  const double loss = std::log(sum) + zmax - z2[y];
  if (grad == nullptr) return loss;

  Vector delta2 = e / sum;
  delta2[y] -= 1.0;
  Vector delta1 = W2.transpose() * delta2;
  for (Index r = 0; r < h; ++r) {
    if (z1[r] <= 0.0) delta1[r] = 0.0;
  }
  double* g = grad->data();
  Eigen::Map<RowMajor>(g, h, d).noalias() += delta1 * x.transpose();
  Eigen::Map<Vector>(g + h * d, h) += delta1;
  Eigen::Map<RowMajor>(g + h * d + h, c, h).noalias() += delta2 * a1.transpose();
  Eigen::Map<Vector>(g + h * d + h + c * h, c) += delta2;
  return loss;
}

double ToyMLP::sample_loss(const Vector& w, Index i) const {
  if (w.size() != param_count()) throw InvalidArgument("ToyMLP: weight length mismatch");
  if (i < 0 || i >= data_.size()) throw InvalidArgument("ToyMLP: sample out of range");
  return accumulate(w, i, nullptr);
}

Vector ToyMLP::per_sample_gradient(const Vector& w, Index i) const {
  if (w.size() != param_count()) throw InvalidArgument("ToyMLP: weight length mismatch");
  if (i < 0 || i >= data_.size()) throw InvalidArgument("ToyMLP: sample out of range");
  Vector g = Vector::Zero(param_count());
  accumulate(w, i, &g);
  return g;
}

double ToyMLP::loss(const Vector& w, std::span<const Index> batch) const {
  if (batch.empty()) throw InvalidArgument("ToyMLP: empty batch");
  double total = 0.0;
  for (Index i : batch) total += sample_loss(w, i);
  return total / static_cast<double>(batch.size());
}

Vector ToyMLP::gradient(const Vector& w, std::span<const Index> batch) const {
  if (batch.empty()) throw InvalidArgument("ToyMLP: empty batch");
  if (w.size() != param_count()) throw InvalidArgument("ToyMLP: weight length mismatch");
  Vector g = Vector::Zero(param_count());
  for (Index i : batch) {
    if (i < 0 || i >= data_.size()) throw InvalidArgument("ToyMLP: sample out of range");
    accumulate(w, i, &g);
  }
  g /= static_cast<double>(batch.size());
  return g;
}

double ToyMLP::accuracy(const Vector& w) const {
  Index hits = 0;
  for (Index i = 0; i < data_.size(); ++i) {
    Index best = 0;
    logits(w, i).maxCoeff(&best);
    hits += best == data_.labels[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(hits) / static_cast<double>(data_.size());
}

Vector ToyMLP::init_weights(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Vector w = Vector::Zero(param_count());
  const Index h = hidden_, d = input_, c = classes_;
  std::uniform_real_distribution<double> fc1(-std::sqrt(6.0 / d), std::sqrt(6.0 / d));
  std::uniform_real_distribution<double> fc2(-std::sqrt(6.0 / h), std::sqrt(6.0 / h));
  for (Index t = 0; t < h * d; ++t) w[t] = fc1(rng);
  for (Index t = 0; t < c * h; ++t) w[h * d + h + t] = fc2(rng);
  return w;
}

Vector ToyMLP::train(Vector w, const TrainOptions& opts) const {
  if (opts.batch_size < 1 || opts.epochs < 0) throw InvalidArgument("ToyMLP::train: bad options");
  std::mt19937_64 rng(opts.seed);
  std::vector<Index> order = all_indices(data_.size());
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t len = std::min(order.size() - start,
                                       static_cast<std::size_t>(opts.batch_size));
      w -= opts.learning_rate *
           gradient(w, std::span<const Index>(order.data() + start, len));
    }
  }
  return w;
}

std::vector<std::vector<Index>> sample_batches(Index dataset_size, Index n,
                                               Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw InvalidArgument("sample_batches: n and m must be >= 1");
  if (n * m > dataset_size) {
    throw InvalidArgument("insufficient data: n*m = " + std::to_string(n * m) +
                          " exceeds dataset size " + std::to_string(dataset_size));
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> perm = all_indices(dataset_size);
  // Partial Fisher-Yates: only the first n·m positions are needed.
  for (Index t = 0; t < n * m; ++t) {
    std::uniform_int_distribution<Index> pick(t, dataset_size - 1);
    std::swap(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<std::vector<Index>> batches(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    batches[static_cast<std::size_t>(r)].assign(perm.begin() + r * m, perm.begin() + (r + 1) * m);
  }
  return batches;
}

FisherBuild build_fisher_matrix(const GradientOracle& oracle, const Vector& wbar,
                                Index n, Index m, std::uint64_t seed) {
  if (wbar.size() != oracle.dim()) throw InvalidArgument("build_fisher_matrix: wbar length mismatch");
  FisherBuild out;
  out.batches = sample_batches(oracle.dataset_size(), n, m, seed);
  out.alpha = 1.0 / static_cast<double>(m);
  Eigen::MatrixXd rows(n, oracle.dim());
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < n; ++r) {
    rows.row(r) = oracle.gradient(wbar, out.batches[static_cast<std::size_t>(r)]).transpose();
  }
  out.A = GradientMatrix(std::move(rows));
  return out;
}

double hessian_trace_estimate(const GradientOracle& oracle, const Vector& w,
                              int probes, std::uint64_t seed) {
  if (probes < 1) throw InvalidArgument("hessian_trace_estimate: probes must be >= 1");
  const double eps = 1e-4 * (1.0 + w.cwiseAbs().maxCoeff());
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  double total = 0.0;
  for (int t = 0; t < probes; ++t) {
    Vector v(w.size());
    for (Index j = 0; j < v.size(); ++j) v[j] = coin(rng) ? 1.0 : -1.0;
    const Vector hv = (oracle.full_gradient(w + eps * v) - oracle.full_gradient(w - eps * v)) / (2.0 * eps);
    total += v.dot(hv);
  }
  return total / probes;
}

double estimate_alpha_trace(const GradientOracle& oracle, const GradientMatrix& A,
                            const Vector& wbar, int probes, std::uint64_t seed) {
  const double fisher_trace = A.view().squaredNorm() / static_cast<double>(A.rows());
  const double hessian_trace = hessian_trace_estimate(oracle, wbar, probes, seed);
  if (!(hessian_trace > 0.0)) {
    throw IndeterminateCurvature("Hessian trace estimate is not positive (" +
                                 std::to_string(hessian_trace) + ")");
  }
  return fisher_trace / hessian_trace;
}

double true_loss(const GradientOracle& oracle, const Vector& w) {
  return oracle.full_loss(w);
}

ToyTask make_toy_task(const ToyTaskOptions& opts) {
  ToyMLP model(make_blobs(opts.data), opts.hidden);
  Vector w = model.train(model.init_weights(opts.init_seed), opts.train);
  return {std::move(model), std::move(w)};
}

}  // namespace chita
