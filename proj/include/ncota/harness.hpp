#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncota/channel.hpp"
#include "ncota/learner.hpp"
#include "ncota/otaphy.hpp"
#include "ncota/uplink.hpp"

namespace ncota {

enum class Scheme { kIdealSignSgdMv, kFedAvgIdeal, kFskMv, kFskMvDpc };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme);

struct PhyConfig {
  std::size_t subcarriers = 64;
  // 0 selects the smallest S that fits the model in at most four frames.
  std::size_t symbols = 0;
  std::optional<double> power_cap;
};

enum class DatasetKind { kSynthetic, kMnist };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kSynthetic;
  // MNIST: directory holding the four standard IDX files.
  std::filesystem::path path;
  // MNIST: keep only the first N training rows (0 keeps all).
  std::size_t train_limit = 0;
  // Synthetic blobs: train rows, held-out rows, input dimension, classes.
  std::size_t samples = 10000;
  std::size_t test_samples = 2000;
  std::size_t input_dim = 20;
  int num_classes = 10;
  // Defaults to the experiment seed.
  std::optional<std::uint64_t> seed;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kSoftmax;
  std::size_t hidden = 32;
};

// Switches that only tests use; the config file cannot set them.
struct TestHooks {
  bool pin_randomization = false;
  bool unit_channel = false;
};

struct ExperimentConfig {
  Scheme scheme = Scheme::kFskMvDpc;
  TrainingConfig training;
  ChannelConfig channel;
  PhyConfig phy;
  DatasetSpec dataset;
  ModelSpec model;
  std::size_t eval_every = 10;
  std::filesystem::path output;
  // Measured per-round wall time breaks byte-for-byte reproducibility, so it
  // is opt-in; when off the field is written as 0.
  bool record_wall_time = false;
  TestHooks hooks;

  std::uint64_t master_seed() const { return training.seed; }
  void validate() const;
};

// Parses the flat `key = value` format (dotted keys, optional [section]
// headers, # comments). Unknown or duplicate keys are errors.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RoundMetrics {
  std::uint64_t round = 0;
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  double mean_power = 1.0;
  // Fraction of coordinates where the applied vote equals the error-free majority vote.
  double vote_agreement = 1.0;
  // Fraction of coordinates where the applied vote disagrees with sign of
  // the full training-set gradient.
  double empirical_perr = 0.0;
  double wall_time_ms = 0.0;
};

struct ExperimentState {
  ModelState model;
  PowerState power;
};

// Data, model and PHY layout shared by every round of one experiment.
class ExperimentContext {
 public:
  explicit ExperimentContext(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const Dataset& train() const { return train_; }
  const Dataset& test() const { return test_; }
  const std::vector<DatasetShard>& shards() const { return shards_; }
  const Classifier& classifier() const { return classifier_; }
  const UplinkOptions& uplink() const { return uplink_; }
  std::size_t parameter_count() const { return classifier_.parameter_count(); }

  ExperimentState initial_state() const;

 private:
  ExperimentConfig config_;
  Dataset train_;
  Dataset test_;
  std::vector<DatasetShard> shards_;
  Classifier classifier_;
  UplinkOptions uplink_;
};

struct RoundOutcome {
  ExperimentState state;
  RoundMetrics metrics;
  bool evaluated = false;
  SignReport applied_vote;
  SignReport ideal_vote;
  // Raw (agree - disagree)/q per device, before the absolute value.
  std::vector<double> device_agreement;
};

// One communication round: local gradients, sign quantization, aggregation
// by the configured scheme, power update (fsk_mv_dpc only), global update.
// Test metrics are filled when n % eval_every == 0 or `force_eval` is set.
RoundOutcome run_round(const ExperimentContext& context, const ExperimentState& state,
                       std::uint64_t n, bool force_eval = false);

struct ExperimentResult {
  std::vector<RoundMetrics> records;
  ExperimentState final_state;
  double final_accuracy = 0.0;
  std::uint64_t total_bits = 0;
  std::filesystem::path metrics_path;
  std::filesystem::path summary_path;
};

// Runs all rounds. When config.output is non-empty, writes one JSON line per
// evaluated round (rounds with n % eval_every == 0, plus the last round) and
// a one-row CSV summary next to it.
ExperimentResult run_experiment_detailed(const ExperimentConfig& config);
std::filesystem::path run_experiment(const ExperimentConfig& config);

std::filesystem::path summary_path_for(const std::filesystem::path& metrics_path);
std::string metrics_to_json_line(const RoundMetrics& metrics);

// Re-emits a metrics JSONL file as `round,scheme,accuracy` CSV.
std::string metrics_to_plot_csv(const std::filesystem::path& metrics_path, std::string_view scheme);

}  // namespace ncota
