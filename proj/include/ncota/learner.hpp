#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ncota/sign.hpp"

namespace ncota {

// Row-major feature matrix plus class labels.
struct Dataset {
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t input_dim = 0;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }

  // Throws ConsistencyError if rows/labels disagree or a label is out of range.
  void validate() const;
};

// Reads an IDX image file (magic 2051) and label file (magic 2049).
// Pixels are scaled to [0, 1].
Dataset load_idx_dataset(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path);

// Class-conditional Gaussian blobs: class c has mean mu_c ~ N(0, I) and
// samples x = mu_c + N(0, I). Labels are balanced to within one sample.
Dataset make_synthetic_dataset(std::size_t num_samples, std::size_t input_dim, int num_classes,
                               std::uint64_t seed);

// Copies the given rows (in order) into a new dataset.
Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> indices);

enum class PartitionMode { kIid, kNonIid };

PartitionMode parse_partition_mode(std::string_view name);
std::string_view to_string(PartitionMode mode);

struct DatasetShard {
  std::size_t owner = 0;
  std::vector<std::size_t> sample_indices;
};

// iid: shuffled near-equal split. non-iid: label-sorted data cut into 2M
// contiguous pieces, two random pieces per device.
std::vector<DatasetShard> partition(const Dataset& dataset, int num_devices, PartitionMode mode,
                                    std::uint64_t seed);

struct ModelState {
  std::vector<double> weights;
  std::uint64_t round = 0;
};

struct GradientVector {
  std::vector<double> values;
  std::size_t batch_size = 0;
};

enum class ModelKind { kSoftmax, kMlp };

// The trainable model: multinomial logistic regression by default, or a
// one-hidden-layer tanh MLP. Parameters live in a flat vector.
//
// Softmax layout: W (classes x input), b (classes).
// MLP layout:     W1 (hidden x input), b1 (hidden), W2 (classes x hidden), b2 (classes).
class Classifier {
 public:
  static Classifier softmax(std::size_t input_dim, int num_classes);
  static Classifier mlp(std::size_t input_dim, std::size_t hidden, int num_classes);

  ModelKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  int num_classes() const { return num_classes_; }
  std::size_t parameter_count() const;

  // Zeros for softmax; Glorot-uniform weights and zero biases for the MLP.
  std::vector<double> initial_weights(std::uint64_t seed) const;

  void logits(std::span<const double> weights, std::span<const double> x,
              std::span<double> out) const;

  // Mean cross-entropy over the given rows. When `grad` is non-empty it is
  // overwritten with the mean gradient. Rows are visited in the order given.
  double loss_and_gradient(std::span<const double> weights, const Dataset& dataset,
                           std::span<const std::size_t> indices, std::span<double> grad) const;

 private:
  Classifier(ModelKind kind, std::size_t input_dim, std::size_t hidden, int num_classes)
      : kind_(kind), input_dim_(input_dim), hidden_(hidden), num_classes_(num_classes) {}

  ModelKind kind_;
  std::size_t input_dim_;
  std::size_t hidden_;
  int num_classes_;
};

// Identifies where a gradient was computed, for error messages.
struct GradientContext {
  std::uint64_t round = 0;
  std::size_t device = 0;
};

// Mini-batch gradient over d_b rows drawn without replacement from the shard.
// Batch rows are summed in ascending index order, so a full-shard batch is
// bit-identical to full_gradient() on the shard.
GradientVector compute_local_gradient(const Classifier& model, const ModelState& state,
                                      const Dataset& dataset, const DatasetShard& shard,
                                      std::size_t batch_size, std::uint64_t seed,
                                      GradientContext context = {});

// Gradient of the mean loss over all of `indices` (ascending order is the caller's job).
GradientVector full_gradient(const Classifier& model, const ModelState& state,
                             const Dataset& dataset, std::span<const std::size_t> indices);

SignReport sign_quantize(const GradientVector& gradient);

// w <- w - eta * v; round advances by one.
ModelState apply_global_update(const ModelState& state, const SignReport& vote,
                               double learning_rate);

// w <- w - eta * g; used by the float-averaging baseline.
ModelState apply_gradient_step(const ModelState& state, std::span<const double> gradient,
                               double learning_rate);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

// Argmax ties resolve to the lowest class index.
Evaluation evaluate(const Classifier& model, const ModelState& state, const Dataset& dataset);

struct TrainingConfig {
  double learning_rate = 0.004;
  std::size_t batch_size = 128;
  std::size_t rounds = 200;
  int num_devices = 31;
  PartitionMode partition_mode = PartitionMode::kIid;
  std::uint64_t seed = 1;

  // Throws ArgumentError when any field is out of range or the batch does
  // not fit in the smallest shard.
  void validate(std::span<const DatasetShard> shards) const;
};

}  // namespace ncota
