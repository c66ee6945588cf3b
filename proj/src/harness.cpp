#include "ncota/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ncota/analysis.hpp"
#include "ncota/detector.hpp"
#include "ncota/errors.hpp"
#include "ncota/random.hpp"

namespace ncota {
namespace {

struct LoadedData {
  Dataset train;
  Dataset test;
};

LoadedData load_data(const ExperimentConfig& config) {
  const DatasetSpec& spec = config.dataset;
  LoadedData out;
  if (spec.kind == DatasetKind::kMnist) {
    out.train = load_idx_dataset(spec.path / "train-images-idx3-ubyte",
                                 spec.path / "train-labels-idx1-ubyte");
    out.test = load_idx_dataset(spec.path / "t10k-images-idx3-ubyte",
                                spec.path / "t10k-labels-idx1-ubyte");
    if (spec.train_limit > 0 && spec.train_limit < out.train.size()) {
      std::vector<std::size_t> keep(spec.train_limit);
      std::iota(keep.begin(), keep.end(), std::size_t{0});
      out.train = select_rows(out.train, keep);
    }
    return out;
  }
  const Dataset all = make_synthetic_dataset(spec.samples + spec.test_samples, spec.input_dim,
                                             spec.num_classes,
                                             spec.seed.value_or(config.master_seed()));
  std::vector<std::size_t> rows(all.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto split = static_cast<std::ptrdiff_t>(spec.samples);
  out.train = select_rows(all, std::span(rows).first(static_cast<std::size_t>(split)));
  out.test = select_rows(all, std::span(rows).subspan(static_cast<std::size_t>(split)));
  return out;
}

Classifier make_classifier(const ExperimentConfig& config, const Dataset& data) {
  if (config.model.kind == ModelKind::kMlp) {
    return Classifier::mlp(data.input_dim, config.model.hidden, data.num_classes);
  }
  return Classifier::softmax(data.input_dim, data.num_classes);
}

bool uses_uplink(Scheme scheme) { return scheme == Scheme::kFskMv || scheme == Scheme::kFskMvDpc; }

}  // namespace

ExperimentContext::ExperimentContext(ExperimentConfig config)
    : config_(std::move(config)), classifier_(Classifier::softmax(1, 2)) {
  config_.validate();
  auto data = load_data(config_);
  train_ = std::move(data.train);
  test_ = std::move(data.test);
  classifier_ = make_classifier(config_, train_);
  shards_ = partition(train_, config_.training.num_devices, config_.training.partition_mode,
                      config_.master_seed());
  config_.training.validate(shards_);

  const std::size_t q = classifier_.parameter_count();
  const std::size_t A = config_.phy.subcarriers;
  uplink_.channel = config_.channel;
  uplink_.subcarriers = A;
  // Auto layout: at most four frames of A*S/2 coordinates each.
  uplink_.symbols = config_.phy.symbols != 0 ? config_.phy.symbols
                                             : std::max<std::size_t>(1, (q + 2 * A - 1) / (2 * A));
  uplink_.randomization = config_.hooks.pin_randomization ? Randomization::kPinned
                                                          : Randomization::kUnitCircle;
  uplink_.unit_channel = config_.hooks.unit_channel;
}

ExperimentState ExperimentContext::initial_state() const {
  ExperimentState state;
  state.model.weights = classifier_.initial_weights(config_.master_seed());
  state.power = PowerState::initial(shards_.size());
  return state;
}

RoundOutcome run_round(const ExperimentContext& context, const ExperimentState& state,
                       std::uint64_t n, bool force_eval) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig& cfg = context.config();
  const std::uint64_t seed = cfg.master_seed();
  const std::size_t devices = context.shards().size();
  const std::size_t q = context.parameter_count();

  std::vector<GradientVector> gradients;
  std::vector<SignReport> reports;
  gradients.reserve(devices);
  reports.reserve(devices);
  for (std::size_t m = 0; m < devices; ++m) {
    gradients.push_back(compute_local_gradient(
        context.classifier(), state.model, context.train(), context.shards()[m],
        cfg.training.batch_size, derive_seed(seed, Stream::kBatch, {n, m}), {n, m}));
    reports.push_back(sign_quantize(gradients.back()));
  }

  RoundOutcome out;
  out.ideal_vote = ideal_majority_vote(reports);
  out.state.power = state.power;

  switch (cfg.scheme) {
    case Scheme::kIdealSignSgdMv:
      out.applied_vote = out.ideal_vote;
      break;
    case Scheme::kFedAvgIdeal: {
      std::vector<double> mean(q, 0.0);
      for (const auto& g : gradients) {
        for (std::size_t i = 0; i < q; ++i) mean[i] += g.values[i];
      }
      for (double& v : mean) v /= static_cast<double>(devices);
      out.state.model = apply_gradient_step(state.model, mean, cfg.training.learning_rate);
      out.applied_vote = sign_quantize(GradientVector{std::move(mean), cfg.training.batch_size});
      break;
    }
    case Scheme::kFskMv: {
      const std::vector<double> unit_powers(devices, 1.0);
      out.applied_vote = transmit_votes(reports, unit_powers, context.uplink(),
                                        derive_seed(seed, Stream::kChannel, {n}))
                             .votes;
      break;
    }
    case Scheme::kFskMvDpc:
      out.applied_vote = transmit_votes(reports, state.power.powers, context.uplink(),
                                        derive_seed(seed, Stream::kChannel, {n}))
                             .votes;
      out.state.power = update_power(state.power, reports, out.ideal_vote, cfg.phy.power_cap);
      break;
  }
  if (cfg.scheme != Scheme::kFedAvgIdeal) {
    out.state.model = apply_global_update(state.model, out.applied_vote, cfg.training.learning_rate);
  }

  out.device_agreement.reserve(devices);
  for (const auto& r : reports) out.device_agreement.push_back(signed_agreement(r, out.ideal_vote));

  RoundMetrics& metrics = out.metrics;
  metrics.round = n;
  metrics.mean_power = uses_uplink(cfg.scheme) ? mean_power(out.state.power) : 1.0;
  metrics.vote_agreement = agreement_fraction(out.applied_vote, out.ideal_vote);
  metrics.test_accuracy = std::numeric_limits<double>::quiet_NaN();
  metrics.test_loss = std::numeric_limits<double>::quiet_NaN();
  metrics.empirical_perr = std::numeric_limits<double>::quiet_NaN();

  out.evaluated = force_eval || n % cfg.eval_every == 0;
  if (out.evaluated) {
    const Evaluation eval = evaluate(context.classifier(), out.state.model, context.test());
    metrics.test_accuracy = eval.accuracy;
    metrics.test_loss = eval.mean_loss;

    std::vector<std::size_t> all(context.train().size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const SignReport truth =
        sign_quantize(full_gradient(context.classifier(), state.model, context.train(), all));
    metrics.empirical_perr = 1.0 - agreement_fraction(out.applied_vote, truth);
  }
  if (cfg.record_wall_time) {
    metrics.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

std::filesystem::path summary_path_for(const std::filesystem::path& metrics_path) {
  auto p = metrics_path;
  p.replace_extension(".summary.csv");
  return p;
}

std::string metrics_to_json_line(const RoundMetrics& m) {
  nlohmann::ordered_json j;
  j["round"] = m.round;
  j["test_accuracy"] = m.test_accuracy;
  j["test_loss"] = m.test_loss;
  j["mean_power"] = m.mean_power;
  j["vote_agreement"] = m.vote_agreement;
  j["empirical_perr"] = m.empirical_perr;
  j["wall_time_ms"] = m.wall_time_ms;
  return j.dump();
}

ExperimentResult run_experiment_detailed(const ExperimentConfig& config) {
  ExperimentResult result;
  std::ofstream metrics_file;
  std::ofstream summary_file;
  if (!config.output.empty()) {
    result.metrics_path = config.output;
    result.summary_path = summary_path_for(config.output);
    metrics_file.open(result.metrics_path, std::ios::out | std::ios::trunc);
    if (!metrics_file) throw IoError("cannot write metrics file '" + result.metrics_path.string() + "'");
    summary_file.open(result.summary_path, std::ios::out | std::ios::trunc);
    if (!summary_file) throw IoError("cannot write summary file '" + result.summary_path.string() + "'");
  }

  const ExperimentContext context(config);
  ExperimentState state = context.initial_state();
  const std::size_t rounds = config.training.rounds;
  for (std::size_t n = 0; n < rounds; ++n) {
    RoundOutcome outcome = run_round(context, state, n, n + 1 == rounds);
    state = std::move(outcome.state);
    if (!outcome.evaluated) continue;
    result.records.push_back(outcome.metrics);
    if (metrics_file.is_open()) metrics_file << metrics_to_json_line(outcome.metrics) << '\n';
  }

  result.final_state = state;
  result.final_accuracy = result.records.back().test_accuracy;
  const auto family = config.scheme == Scheme::kFedAvgIdeal ? CompressionScheme::kSgd
                                                             : CompressionScheme::kSignSgdMv;
  result.total_bits = comm_cost(family, context.shards().size(), context.parameter_count()) * rounds;

  if (summary_file.is_open()) {
    nlohmann::json final_acc = result.final_accuracy;
    nlohmann::json final_power = result.records.back().mean_power;
    summary_file << "scheme,final_accuracy,mean_power,total_bits,rounds,seed\n"
                 << to_string(config.scheme) << ',' << final_acc.dump() << ','
                 << final_power.dump() << ',' << result.total_bits << ',' << rounds << ','
                 << config.master_seed() << '\n';
  }
  if (metrics_file.is_open()) {
    metrics_file.flush();
    if (!metrics_file) throw IoError("failed writing '" + result.metrics_path.string() + "'");
  }
  return result;
}

std::filesystem::path run_experiment(const ExperimentConfig& config) {
  if (config.output.empty()) throw ConfigError("run_experiment: no output path configured");
  return run_experiment_detailed(config).metrics_path;
}

std::string metrics_to_plot_csv(const std::filesystem::path& metrics_path, std::string_view scheme) {
  std::ifstream in(metrics_path);
  if (!in) throw ConfigError("metrics file not found: '" + metrics_path.string() + "'");
  std::ostringstream out;
  out << "round,scheme,accuracy\n";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(metrics_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("round") || !j.contains("test_accuracy")) {
      throw FormatError(metrics_path.string() + ":" + std::to_string(line_no) +
                        ": record lacks round/test_accuracy");
    }
    out << j["round"].dump() << ',' << scheme << ',' << j["test_accuracy"].dump() << '\n';
  }
  return out.str();
}

}  // namespace ncota
