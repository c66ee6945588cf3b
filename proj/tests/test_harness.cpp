#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ncota/errors.hpp"
#include "ncota/harness.hpp"
#include "test_util.hpp"

using namespace ncota;

namespace {

ExperimentConfig small_config(Scheme scheme, std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.scheme = scheme;
  cfg.training.rounds = 30;
  cfg.training.num_devices = 5;
  cfg.training.batch_size = 32;
  cfg.training.learning_rate = 0.01;
  cfg.training.seed = seed;
  cfg.dataset.samples = 1000;
  cfg.dataset.test_samples = 300;
  cfg.dataset.input_dim = 8;
  cfg.dataset.num_classes = 4;
  cfg.channel.noise_variance = 1.0;
  cfg.eval_every = 10;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& p) {
  std::vector<nlohmann::json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_experiment_config(R"(
# comment
scheme = fsk_mv
rounds = 50
devices = 7
batch_size = 16
learning_rate = 0.01
partition = non-iid
seed = 42
eval_every = 5
output = "out/run.jsonl"  # trailing comment
model = mlp
model.hidden = 12

[dataset]
kind = synthetic
spec = 700, 6, 3
test_samples = 100

[channel]
beta = 4
sync_error_max = 0.25
fading = per_frame

[phy]
subcarriers = 32
symbols = 2
power_cap = 10
)");
  CHECK(cfg.scheme == Scheme::kFskMv);
  CHECK(cfg.training.rounds == 50);
  CHECK(cfg.training.num_devices == 7);
  CHECK(cfg.training.batch_size == 16);
  CHECK(cfg.training.learning_rate == 0.01);
  CHECK(cfg.training.partition_mode == PartitionMode::kNonIid);
  CHECK(cfg.master_seed() == 42);
  CHECK(cfg.eval_every == 5);
  CHECK(cfg.output == "out/run.jsonl");
  CHECK(cfg.model.kind == ModelKind::kMlp);
  CHECK(cfg.model.hidden == 12);
  CHECK(cfg.dataset.samples == 700);
  CHECK(cfg.dataset.input_dim == 6);
  CHECK(cfg.dataset.num_classes == 3);
  CHECK(cfg.dataset.test_samples == 100);
  CHECK(cfg.channel.noise_variance == doctest::Approx(0.5));
  CHECK(cfg.channel.sync_error_max == 0.25);
  CHECK(cfg.channel.fading == FadingMode::kPerFrame);
  CHECK(cfg.channel.fft_size == 32);
  CHECK(cfg.phy.subcarriers == 32);
  CHECK(cfg.phy.symbols == 2);
  CHECK(cfg.phy.power_cap == 10.0);
  CHECK(!cfg.record_wall_time);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_experiment_config("colour = blue"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("rounds = 5\nrounds = 6"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("channel.beta = 2\nchannel.noise_var = 1"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("rounds = many"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("scheme = carrier_pigeon"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("phy.subcarriers = 7"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("channel.sync_error_max = 1.5"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("just a line"), ConfigError);
  try {
    load_experiment_config("/nonexistent/missing.toml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("not found") != std::string::npos);
  }
}

TEST_CASE("ideal scheme agrees with itself") {
  const ExperimentContext ctx(small_config(Scheme::kIdealSignSgdMv));
  ExperimentState state = ctx.initial_state();
  for (std::uint64_t n = 0; n < 5; ++n) {
    auto out = run_round(ctx, state, n);
    CHECK(out.metrics.vote_agreement == 1.0);
    CHECK(out.applied_vote == out.ideal_vote);
    state = std::move(out.state);
  }
  CHECK(state.model.round == 5);
}

TEST_CASE("noiseless unit-channel FSK reproduces the ideal vote stream") {
  auto ideal_cfg = small_config(Scheme::kIdealSignSgdMv);
  auto fsk_cfg = small_config(Scheme::kFskMv);
  fsk_cfg.channel.noise_variance = 0.0;
  fsk_cfg.hooks.pin_randomization = true;
  fsk_cfg.hooks.unit_channel = true;
  const ExperimentContext ideal(ideal_cfg);
  const ExperimentContext fsk(fsk_cfg);
  ExperimentState a = ideal.initial_state();
  ExperimentState b = fsk.initial_state();
  for (std::uint64_t n = 0; n < 20; ++n) {
    auto ra = run_round(ideal, a, n);
    auto rb = run_round(fsk, b, n);
    REQUIRE(ra.applied_vote == rb.applied_vote);
    CHECK(rb.metrics.vote_agreement == 1.0);
    a = std::move(ra.state);
    b = std::move(rb.state);
  }
  CHECK(a.model.weights == b.model.weights);
}

TEST_CASE("fedavg smoothed train loss does not increase") {
  auto cfg = small_config(Scheme::kFedAvgIdeal);
  cfg.training.rounds = 200;
  cfg.training.learning_rate = 0.05;
  const ExperimentContext ctx(cfg);
  ExperimentState state = ctx.initial_state();
  std::vector<double> losses;
  for (std::uint64_t n = 0; n < 200; ++n) {
    state = run_round(ctx, state, n).state;
    losses.push_back(evaluate(ctx.classifier(), state.model, ctx.train()).mean_loss);
  }
  std::vector<double> smooth;
  for (std::size_t i = 9; i < losses.size(); ++i) {
    smooth.push_back(std::accumulate(losses.begin() + static_cast<std::ptrdiff_t>(i) - 9,
                                     losses.begin() + static_cast<std::ptrdiff_t>(i) + 1, 0.0) / 10.0);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i) CHECK(smooth[i] <= smooth[i - 1]);
  CHECK(smooth.back() < smooth.front());
}

TEST_CASE("power state follows the scheme") {
  SUBCASE("fsk_mv keeps unit power") {
    const ExperimentContext ctx(small_config(Scheme::kFskMv));
    ExperimentState state = ctx.initial_state();
    for (std::uint64_t n = 0; n < 5; ++n) {
      auto out = run_round(ctx, state, n);
      CHECK(out.metrics.mean_power == 1.0);
      state = std::move(out.state);
    }
  }
  SUBCASE("fsk_mv_dpc grows by |agreement| against the ideal vote") {
    const ExperimentContext ctx(small_config(Scheme::kFskMvDpc));
    ExperimentState state = ctx.initial_state();
    for (std::uint64_t n = 0; n < 5; ++n) {
      auto out = run_round(ctx, state, n);
      for (std::size_t m = 0; m < state.power.powers.size(); ++m) {
        CHECK(out.state.power.powers[m] ==
              doctest::Approx(state.power.powers[m] + std::abs(out.device_agreement[m])).epsilon(1e-12));
      }
      state = std::move(out.state);
    }
  }
}

TEST_CASE("run_experiment writes metrics and a summary") {
  test::TempDir dir;
  auto cfg = small_config(Scheme::kFskMvDpc);
  cfg.training.rounds = 100;
  cfg.output = dir / "dpc.jsonl";
  const auto path = run_experiment(cfg);
  CHECK(path == cfg.output);

  const auto records = read_jsonl(path);
  REQUIRE(records.size() == 100 / cfg.eval_every + 1);
  CHECK(records.back()["round"] == 99);
  double prev = 1.0;
  for (const auto& r : records) {
    std::vector<std::string> keys;
    for (auto it = r.begin(); it != r.end(); ++it) keys.push_back(it.key());
    std::sort(keys.begin(), keys.end());
    CHECK(keys == std::vector<std::string>{"empirical_perr", "mean_power", "round", "test_accuracy",
                                           "test_loss", "vote_agreement", "wall_time_ms"});
    const double p = r["mean_power"];
    CHECK(p >= 1.0);
    CHECK(p >= prev);
    prev = p;
    const double acc = r["test_accuracy"];
    CHECK((acc >= 0.0 && acc <= 1.0));
    const double agree = r["vote_agreement"];
    CHECK((agree >= 0.0 && agree <= 1.0));
    const double perr = r["empirical_perr"];
    CHECK((perr >= 0.0 && perr <= 1.0));
  }

  std::istringstream summary(slurp(summary_path_for(path)));
  std::string header, row;
  std::getline(summary, header);
  std::getline(summary, row);
  CHECK(header == "scheme,final_accuracy,mean_power,total_bits,rounds,seed");
  CHECK(row.rfind("fsk_mv_dpc,", 0) == 0);
  // 2 * M * q bits per round, 5 devices, q = 8*4 + 4.
  CHECK(row.find(",36000,100,1") != std::string::npos);
}

TEST_CASE("fsk_mv mean_power column is exactly 1") {
  test::TempDir dir;
  auto cfg = small_config(Scheme::kFskMv);
  cfg.output = dir / "fsk.jsonl";
  for (const auto& r : read_jsonl(run_experiment(cfg))) CHECK(r["mean_power"].get<double>() == 1.0);
}

TEST_CASE("identical config and seed give byte-identical files") {
  test::TempDir dir;
  for (auto scheme : {Scheme::kFskMvDpc, Scheme::kFedAvgIdeal}) {
    auto cfg = small_config(scheme, 9);
    cfg.channel.sync_error_max = 0.25;
    cfg.output = dir / "a.jsonl";
    run_experiment(cfg);
    cfg.output = dir / "b.jsonl";
    run_experiment(cfg);
    CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
    CHECK(slurp(dir / "a.summary.csv") == slurp(dir / "b.summary.csv"));
    CHECK(!slurp(dir / "a.jsonl").empty());
  }
}

TEST_CASE("unwritable output fails before training") {
  auto cfg = small_config(Scheme::kFskMv);
  cfg.output = "/nonexistent-dir/run.jsonl";
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
  cfg.output.clear();
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("mlp and non-iid runs") {
  auto cfg = small_config(Scheme::kFskMvDpc);
  cfg.model.kind = ModelKind::kMlp;
  cfg.model.hidden = 6;
  cfg.training.partition_mode = PartitionMode::kNonIid;
  cfg.training.rounds = 10;
  cfg.phy.power_cap = 3.0;
  const auto result = run_experiment_detailed(cfg);
  CHECK(result.records.size() == 2);
  for (double p : result.final_state.power.powers) CHECK(p <= 3.0);
}

TEST_CASE("plot csv") {
  test::TempDir dir;
  auto cfg = small_config(Scheme::kIdealSignSgdMv);
  cfg.output = dir / "m.jsonl";
  run_experiment(cfg);
  const auto csv = metrics_to_plot_csv(cfg.output, "ideal_signsgd_mv");
  CHECK(csv.rfind("round,scheme,accuracy\n0,ideal_signsgd_mv,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  std::ofstream(dir / "bad.jsonl") << "{not json\n";
  CHECK_THROWS_AS(metrics_to_plot_csv(dir / "bad.jsonl", "x"), FormatError);
  CHECK_THROWS_AS(metrics_to_plot_csv(dir / "none.jsonl", "x"), ConfigError);
}

TEST_CASE("scheme ordering and sync robustness over five seeds") {
  // Default experiment size: 31 devices, d_b = 128, eta = 0.004, 200 rounds.
  auto base = ExperimentConfig{};
  base.channel.noise_variance = kSymbolEnergy / 4.0;
  base.eval_every = 200;
  std::vector<double> fsk, dpc, dpc_sync, dpc_aligned;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = base;
    cfg.training.seed = seed;
    cfg.scheme = Scheme::kFskMv;
    fsk.push_back(run_experiment_detailed(cfg).final_accuracy);
    cfg.scheme = Scheme::kFskMvDpc;
    dpc.push_back(run_experiment_detailed(cfg).final_accuracy);
    cfg.channel.sync_error_max = 0.25;
    dpc_sync.push_back(run_experiment_detailed(cfg).final_accuracy);
    dpc_aligned.push_back(dpc.back());
  }
  CHECK(median(dpc) >= median(fsk) - 0.005);
  CHECK(std::abs(median(dpc_sync) - median(dpc_aligned)) <= 0.01);
}
