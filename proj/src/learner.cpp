#include "ncota/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "ncota/errors.hpp"
#include "ncota/random.hpp"

namespace ncota {

double agreement_fraction(const SignReport& a, const SignReport& b) {
  if (a.size() != b.size()) throw DimensionError("agreement_fraction: report lengths differ");
  if (a.size() == 0) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

void Dataset::validate() const {
  if (features.size() != labels.size() * input_dim) {
    throw ConsistencyError("dataset feature matrix has " + std::to_string(features.size()) +
                           " entries, expected " + std::to_string(labels.size()) + " rows x " +
                           std::to_string(input_dim));
  }
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw ConsistencyError("dataset label " + std::to_string(label) + " outside 0.." +
                             std::to_string(num_classes - 1));
    }
  }
}

Dataset make_synthetic_dataset(std::size_t num_samples, std::size_t input_dim, int num_classes,
                               std::uint64_t seed) {
  if (num_samples == 0 || input_dim == 0) {
    throw ArgumentError("make_synthetic_dataset: sample count and input dimension must be positive");
  }
  if (num_classes < 2) throw ArgumentError("make_synthetic_dataset: need at least 2 classes");
  if (static_cast<std::size_t>(num_classes) > num_samples) {
    throw ArgumentError("make_synthetic_dataset: more classes (" + std::to_string(num_classes) +
                        ") than samples (" + std::to_string(num_samples) + ")");
  }

  Rng rng(derive_seed(seed, Stream::kSynthetic));
  std::vector<double> means(static_cast<std::size_t>(num_classes) * input_dim);
  for (double& m : means) m = rng.normal();

  Dataset out;
  out.input_dim = input_dim;
  out.num_classes = num_classes;
  out.labels.resize(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    out.labels[i] = static_cast<int>(i % static_cast<std::size_t>(num_classes));
  }
  for (std::size_t i = num_samples - 1; i > 0; --i) {
    std::swap(out.labels[i], out.labels[rng.below(i + 1)]);
  }
  out.features.resize(num_samples * input_dim);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const double* mean = means.data() + static_cast<std::size_t>(out.labels[i]) * input_dim;
    for (std::size_t d = 0; d < input_dim; ++d) {
      out.features[i * input_dim + d] = mean[d] + rng.normal();
    }
  }
  return out;
}

Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> indices) {
  Dataset out;
  out.input_dim = dataset.input_dim;
  out.num_classes = dataset.num_classes;
  out.labels.reserve(indices.size());
  out.features.reserve(indices.size() * dataset.input_dim);
  for (std::size_t idx : indices) {
    if (idx >= dataset.size()) throw ArgumentError("select_rows: index out of range");
    out.labels.push_back(dataset.labels[idx]);
    const auto row = dataset.row(idx);
    out.features.insert(out.features.end(), row.begin(), row.end());
  }
  return out;
}

PartitionMode parse_partition_mode(std::string_view name) {
  if (name == "iid") return PartitionMode::kIid;
  if (name == "non-iid" || name == "non_iid" || name == "noniid") return PartitionMode::kNonIid;
  throw ArgumentError("unknown partition mode '" + std::string(name) + "'");
}

std::string_view to_string(PartitionMode mode) {
  return mode == PartitionMode::kIid ? "iid" : "non-iid";
}

namespace {

// Splits [0, n) into `parts` contiguous near-equal ranges; the first n % parts get one extra.
std::vector<std::size_t> split_points(std::size_t n, std::size_t parts) {
  std::vector<std::size_t> points(parts + 1, 0);
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  for (std::size_t p = 0; p < parts; ++p) points[p + 1] = points[p] + base + (p < extra ? 1 : 0);
  return points;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::vector<DatasetShard> partition(const Dataset& dataset, int num_devices, PartitionMode mode,
                                    std::uint64_t seed) {
  if (num_devices <= 0) throw ArgumentError("partition: device count must be positive");
  const auto devices = static_cast<std::size_t>(num_devices);
  const std::size_t n = dataset.size();
  if (devices > n) {
    throw ArgumentError("partition: " + std::to_string(devices) + " devices but only " +
                        std::to_string(n) + " samples");
  }

  Rng rng(derive_seed(seed, Stream::kPartition));
  std::vector<DatasetShard> shards(devices);
  for (std::size_t m = 0; m < devices; ++m) shards[m].owner = m;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  if (mode == PartitionMode::kIid) {
    shuffle(order, rng);
    const auto cuts = split_points(n, devices);
    for (std::size_t m = 0; m < devices; ++m) {
      shards[m].sample_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(cuts[m]),
                                      order.begin() + static_cast<std::ptrdiff_t>(cuts[m + 1]));
    }
  } else {
    const std::size_t pieces = 2 * devices;
    if (pieces > n) {
      throw ArgumentError("partition: non-iid mode needs at least 2 samples per device");
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dataset.labels[a] < dataset.labels[b];
    });
    const auto cuts = split_points(n, pieces);
    std::vector<std::size_t> piece_ids(pieces);
    std::iota(piece_ids.begin(), piece_ids.end(), std::size_t{0});
    shuffle(piece_ids, rng);
    for (std::size_t m = 0; m < devices; ++m) {
      auto& idx = shards[m].sample_indices;
      for (std::size_t k : {piece_ids[2 * m], piece_ids[2 * m + 1]}) {
        idx.insert(idx.end(), order.begin() + static_cast<std::ptrdiff_t>(cuts[k]),
                   order.begin() + static_cast<std::ptrdiff_t>(cuts[k + 1]));
      }
    }
  }
  return shards;
}

// --- Classifier -------------------------------------------------------------

Classifier Classifier::softmax(std::size_t input_dim, int num_classes) {
  if (input_dim == 0 || num_classes < 2) throw ArgumentError("softmax model: bad dimensions");
  return Classifier(ModelKind::kSoftmax, input_dim, 0, num_classes);
}

Classifier Classifier::mlp(std::size_t input_dim, std::size_t hidden, int num_classes) {
  if (input_dim == 0 || hidden == 0 || num_classes < 2) {
    throw ArgumentError("mlp model: bad dimensions");
  }
  return Classifier(ModelKind::kMlp, input_dim, hidden, num_classes);
}

std::size_t Classifier::parameter_count() const {
  const auto c = static_cast<std::size_t>(num_classes_);
  if (kind_ == ModelKind::kSoftmax) return input_dim_ * c + c;
  return hidden_ * input_dim_ + hidden_ + c * hidden_ + c;
}

std::vector<double> Classifier::initial_weights(std::uint64_t seed) const {
  std::vector<double> w(parameter_count(), 0.0);
  if (kind_ == ModelKind::kSoftmax) return w;

  Rng rng(derive_seed(seed, Stream::kInit));
  const auto c = static_cast<std::size_t>(num_classes_);
  const double a1 = std::sqrt(6.0 / static_cast<double>(input_dim_ + hidden_));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_ + c));
  std::size_t k = 0;
  for (std::size_t i = 0; i < hidden_ * input_dim_; ++i) w[k++] = a1 * (2.0 * rng.uniform() - 1.0);
  k += hidden_;
  for (std::size_t i = 0; i < c * hidden_; ++i) w[k++] = a2 * (2.0 * rng.uniform() - 1.0);
  return w;
}

namespace {

// y[r] = b[r] + sum_c W[r, c] x[c] for a row-major (rows x cols) W.
void affine(const double* W, const double* b, std::span<const double> x, std::size_t rows,
            double* y) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = W + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

// In-place softmax; returns log-sum-exp of the input.
double softmax_inplace(std::span<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return zmax + std::log(sum);
}

}  // namespace

void Classifier::logits(std::span<const double> weights, std::span<const double> x,
                        std::span<double> out) const {
  const auto c = static_cast<std::size_t>(num_classes_);
  if (weights.size() != parameter_count() || x.size() != input_dim_ || out.size() != c) {
    throw DimensionError("Classifier::logits: shape mismatch");
  }
  const double* w = weights.data();
  if (kind_ == ModelKind::kSoftmax) {
    affine(w, w + c * input_dim_, x, c, out.data());
    return;
  }
  std::vector<double> h(hidden_);
  affine(w, w + hidden_ * input_dim_, x, hidden_, h.data());
  for (double& v : h) v = std::tanh(v);
  const double* w2 = w + hidden_ * input_dim_ + hidden_;
  affine(w2, w2 + c * hidden_, h, c, out.data());
}

double Classifier::loss_and_gradient(std::span<const double> weights, const Dataset& dataset,
                                     std::span<const std::size_t> indices,
                                     std::span<double> grad) const {
  const auto c = static_cast<std::size_t>(num_classes_);
  const std::size_t q = parameter_count();
  if (weights.size() != q) throw DimensionError("loss_and_gradient: weight vector length mismatch");
  if (dataset.input_dim != input_dim_ || dataset.num_classes != num_classes_) {
    throw DimensionError("loss_and_gradient: dataset shape does not match model");
  }
  if (indices.empty()) throw ArgumentError("loss_and_gradient: empty batch");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != q) throw DimensionError("loss_and_gradient: gradient length mismatch");
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  const double* w = weights.data();
  std::vector<double> z(c);
  std::vector<double> h(hidden_), dh(hidden_);
  double loss = 0.0;

  for (std::size_t idx : indices) {
    const auto x = dataset.row(idx);
    const auto y = static_cast<std::size_t>(dataset.labels[idx]);

    if (kind_ == ModelKind::kSoftmax) {
      affine(w, w + c * input_dim_, x, c, z.data());
      const double zy = z[y];
      loss += softmax_inplace(z) - zy;
      if (!want_grad) continue;
      z[y] -= 1.0;  // dL/dz = p - onehot(y)
      for (std::size_t r = 0; r < c; ++r) {
        double* gr = grad.data() + r * input_dim_;
        for (std::size_t d = 0; d < input_dim_; ++d) gr[d] += z[r] * x[d];
        grad[c * input_dim_ + r] += z[r];
      }
      continue;
    }

    const double* w2 = w + hidden_ * input_dim_ + hidden_;
    affine(w, w + hidden_ * input_dim_, x, hidden_, h.data());
    for (double& v : h) v = std::tanh(v);
    affine(w2, w2 + c * hidden_, h, c, z.data());
    const double zy = z[y];
    loss += softmax_inplace(z) - zy;
    if (!want_grad) continue;
    z[y] -= 1.0;

    double* g1 = grad.data();
    double* gb1 = g1 + hidden_ * input_dim_;
    double* g2 = gb1 + hidden_;
    double* gb2 = g2 + c * hidden_;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t r = 0; r < c; ++r) {
      for (std::size_t j = 0; j < hidden_; ++j) {
        g2[r * hidden_ + j] += z[r] * h[j];
        dh[j] += w2[r * hidden_ + j] * z[r];
      }
      gb2[r] += z[r];
    }
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double da = dh[j] * (1.0 - h[j] * h[j]);
      double* gj = g1 + j * input_dim_;
      for (std::size_t d = 0; d < input_dim_; ++d) gj[d] += da * x[d];
      gb1[j] += da;
    }
  }

  const double scale = 1.0 / static_cast<double>(indices.size());
  if (want_grad) {
    for (double& g : grad) g *= scale;
  }
  return loss * scale;
}

// --- Gradient / update ops ---------------------------------------------------

namespace {

GradientVector gradient_over(const Classifier& model, const ModelState& state,
                             const Dataset& dataset, std::span<const std::size_t> rows,
                             const GradientContext* context) {
  GradientVector out;
  out.values.assign(model.parameter_count(), 0.0);
  out.batch_size = rows.size();
  const double loss = model.loss_and_gradient(state.weights, dataset, rows, out.values);
  const bool finite = std::isfinite(loss) &&
                      std::all_of(out.values.begin(), out.values.end(),
                                  [](double v) { return std::isfinite(v); });
  if (!finite) {
    std::ostringstream msg;
    msg << "non-finite loss or gradient";
    if (context != nullptr) msg << " at round " << context->round << ", device " << context->device;
    throw NumericError(msg.str());
  }
  return out;
}

}  // namespace

GradientVector compute_local_gradient(const Classifier& model, const ModelState& state,
                                      const Dataset& dataset, const DatasetShard& shard,
                                      std::size_t batch_size, std::uint64_t seed,
                                      GradientContext context) {
  const std::size_t n = shard.sample_indices.size();
  if (batch_size == 0 || batch_size > n) {
    throw ArgumentError("compute_local_gradient: batch size " + std::to_string(batch_size) +
                        " does not fit shard of " + std::to_string(n) + " samples (device " +
                        std::to_string(context.device) + ")");
  }
  std::vector<std::size_t> pool = shard.sample_indices;
  Rng rng(seed);
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::swap(pool[i], pool[i + rng.below(n - i)]);
  }
  pool.resize(batch_size);
  std::sort(pool.begin(), pool.end());
  return gradient_over(model, state, dataset, pool, &context);
}

GradientVector full_gradient(const Classifier& model, const ModelState& state,
                             const Dataset& dataset, std::span<const std::size_t> indices) {
  return gradient_over(model, state, dataset, indices, nullptr);
}

SignReport sign_quantize(const GradientVector& gradient) {
  SignReport out;
  out.signs.reserve(gradient.values.size());
  for (double g : gradient.values) out.signs.push_back(sign_of(g));
  return out;
}

ModelState apply_global_update(const ModelState& state, const SignReport& vote,
                               double learning_rate) {
  if (vote.size() != state.weights.size()) {
    throw DimensionError("apply_global_update: vote length " + std::to_string(vote.size()) +
                         " != model size " + std::to_string(state.weights.size()));
  }
  ModelState next{state.weights, state.round + 1};
  for (std::size_t i = 0; i < next.weights.size(); ++i) {
    next.weights[i] -= learning_rate * static_cast<double>(vote[i]);
  }
  return next;
}

ModelState apply_gradient_step(const ModelState& state, std::span<const double> gradient,
                               double learning_rate) {
  if (gradient.size() != state.weights.size()) {
    throw DimensionError("apply_gradient_step: gradient length mismatch");
  }
  ModelState next{state.weights, state.round + 1};
  for (std::size_t i = 0; i < next.weights.size(); ++i) {
    next.weights[i] -= learning_rate * gradient[i];
  }
  return next;
}

Evaluation evaluate(const Classifier& model, const ModelState& state, const Dataset& dataset) {
  if (dataset.size() == 0) throw ArgumentError("evaluate: empty dataset");
  std::vector<double> z(static_cast<std::size_t>(model.num_classes()));
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    model.logits(state.weights, dataset.row(i), z);
    std::size_t best = 0;
    for (std::size_t k = 1; k < z.size(); ++k) {
      if (z[k] > z[best]) best = k;
    }
    const auto y = static_cast<std::size_t>(dataset.labels[i]);
    if (best == y) ++correct;
    const double zy = z[y];
    loss += softmax_inplace(z) - zy;
  }
  const auto n = static_cast<double>(dataset.size());
  return {static_cast<double>(correct) / n, loss / n};
}

void TrainingConfig::validate(std::span<const DatasetShard> shards) const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning rate must be positive");
  }
  if (batch_size == 0) throw ArgumentError("batch size must be positive");
  if (rounds == 0) throw ArgumentError("round count must be positive");
  if (num_devices <= 0) throw ArgumentError("device count must be positive");
  for (const auto& shard : shards) {
    if (shard.sample_indices.size() < batch_size) {
      throw ArgumentError("batch size " + std::to_string(batch_size) + " exceeds shard of device " +
                          std::to_string(shard.owner) + " (" +
                          std::to_string(shard.sample_indices.size()) + " samples)");
    }
  }
}

}  // namespace ncota
