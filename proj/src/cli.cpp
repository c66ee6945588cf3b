#include "ncota/cli.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "ncota/analysis.hpp"
#include "ncota/errors.hpp"
#include "ncota/harness.hpp"
#include "ncota/verification.hpp"

namespace ncota {
namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

int cmd_train(const std::string& config_path, const std::string& output, std::optional<std::uint64_t> seed,
              std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (!output.empty()) cfg.output = output;
  if (seed) cfg.training.seed = *seed;
  if (cfg.output.empty()) throw ConfigError("no output path: set 'output' in the config or pass --output");
  const auto result = run_experiment_detailed(cfg);
  out << "scheme=" << to_string(cfg.scheme) << " rounds=" << cfg.training.rounds
      << " final_accuracy=" << result.final_accuracy << " total_bits=" << result.total_bits << '\n'
      << "metrics: " << result.metrics_path.string() << '\n'
      << "summary: " << result.summary_path.string() << '\n';
  return kOk;
}

int cmd_mc_verify(const std::string& suite, std::optional<std::size_t> trials, std::uint64_t seed,
                  std::ostream& out) {
  std::vector<SuiteResult> results;
  const bool all = suite == "all";
  if (all || suite == "lemma31") results.push_back(verify_mean_energy(trials.value_or(100000), seed));
  if (all || suite == "lemmaD1") results.push_back(verify_gauss_inequality(trials.value_or(100000), seed));
  if (all || suite == "lemma32") results.push_back(verify_error_probability(trials.value_or(10000), seed));
  if (all || suite == "sync") results.push_back(verify_sync_invariance(trials.value_or(100000), seed));
  if (all || suite == "oracle") results.push_back(verify_ideal_equivalence(seed));
  if (results.empty()) {
    throw ConfigError("unknown suite '" + suite + "' (expected lemma31, lemmaD1, lemma32, sync, oracle, all)");
  }
  bool ok = true;
  for (const auto& r : results) {
    print_suite(out, r);
    ok = ok && r.passed();
  }
  return ok ? kOk : kValidation;
}

struct BoundsArgs {
  std::string cost;
  bool error_prob = false;
  bool failure_prob = false;
  bool convergence = false;
  bool tau = false;
  bool energy = false;
  long devices = 31;
  std::uint64_t dim = 0;
  double beta = 2.0;
  double snr = 1.0;
  long gamma = 1;
  double rounds = 1000.0;
  double l1_smooth = 1.0;
  double l1_sigma = 1.0;
  double gap = 1.0;
  std::optional<double> batch;
  bool strict = false;
  long votes = 0;
  double theta = 1.0;
  double noise_var = 1.0;
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> rows;
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
  };
  if (!a.cost.empty()) {
    if (a.dim == 0) throw ArgumentError("--cost needs --dim");
    const auto bits = comm_cost(parse_compression_scheme(a.cost), static_cast<std::uint64_t>(a.devices), a.dim);
    rows.emplace_back("bits", std::to_string(bits));
  }
  if (a.error_prob) rows.emplace_back("error_prob_bound", num(error_prob_bound(a.devices, a.beta, a.snr)));
  if (a.failure_prob) rows.emplace_back("failure_prob_bound", num(failure_prob_bound(a.snr)));
  if (a.tau) rows.emplace_back("tau", num(convergence_tau(a.beta, a.devices, a.gamma)));
  if (a.convergence) {
    BoundParams p;
    p.devices = a.devices;
    p.beta = a.beta;
    p.gamma = a.gamma;
    p.rounds = a.rounds;
    p.l1_smoothness = a.l1_smooth;
    p.l1_sigma = a.l1_sigma;
    p.objective_gap = a.gap;
    p.batch_size = a.batch;
    p.strict_derivation = a.strict;
    const auto report = convergence_report(p);
    rows.emplace_back("convergence_bound", num(report.bound));
    if (!report.integral_batch) rows.emplace_back("warning", "d_b = N/gamma is not integral");
  }
  if (a.energy) rows.emplace_back("mean_energy", num(mean_energy(a.votes, kSymbolEnergy, a.theta, a.noise_var)));
  if (rows.empty()) {
    throw ArgumentError("bounds: choose at least one of --cost, --error-prob, --failure-prob, --tau, "
                        "--convergence, --mean-energy");
  }
  if (rows.size() == 1) {
    out << rows.front().second << '\n';
  } else {
    for (const auto& [k, v] : rows) out << k << '=' << v << '\n';
  }
  return kOk;
}

int cmd_plot_data(const std::string& input, std::string scheme, const std::string& output, std::ostream& out) {
  if (scheme.empty()) {
    std::ifstream summary(summary_path_for(input));
    std::string header, row;
    if (summary && std::getline(summary, header) && std::getline(summary, row)) {
      scheme = row.substr(0, row.find(','));
    } else {
      scheme = "unknown";
    }
  }
  const std::string csv = metrics_to_plot_csv(input, scheme);
  if (output.empty()) {
    out << csv;
    return kOk;
  }
  std::ofstream file(output);
  if (!file) throw IoError("cannot write '" + output + "'");
  file << csv;
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sign-vote federated learning over a non-coherent over-the-air uplink", "ncota"};
  app.require_subcommand(1);

  std::string config_path, train_output;
  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Run an experiment from a config file");
  train->add_option("--config,-c", config_path, "Experiment config (key = value format)")->required();
  train->add_option("--output,-o", train_output, "Override the metrics output path");
  train->add_option("--seed", train_seed, "Override the master seed");

  std::string suite = "all";
  std::optional<std::size_t> trials;
  std::uint64_t mc_seed = 1;
  auto* verify = app.add_subcommand("mc-verify", "Monte Carlo checks of the closed-form bounds");
  verify->add_option("--suite", suite, "lemma31 | lemmaD1 | lemma32 | sync | oracle | all");
  verify->add_option("--trials", trials, "Trials per grid point (suite default if omitted)");
  verify->add_option("--seed", mc_seed, "Master seed");

  BoundsArgs b;
  auto* bounds = app.add_subcommand("bounds", "Evaluate closed-form bounds and costs");
  bounds->add_option("--cost", b.cost, "Bits per iteration for sgd | qsgd | terngrad | signsgd_mv");
  bounds->add_flag("--error-prob", b.error_prob, "Majority-vote error bound (needs --devices --beta --snr)");
  bounds->add_flag("--failure-prob", b.failure_prob, "Single-device sign-flip bound (needs --snr)");
  bounds->add_flag("--tau", b.tau, "Convergence constant tau (needs --beta --devices --gamma)");
  bounds->add_flag("--convergence", b.convergence, "Convergence-rate bound");
  bounds->add_flag("--mean-energy", b.energy, "Mean bin energy (needs --votes --theta --noise-var)");
  bounds->add_option("--devices,-M,-K", b.devices, "Number of devices");
  bounds->add_option("--dim,-D", b.dim, "Model dimension");
  bounds->add_option("--beta", b.beta, "E0 * theta / sigma_n^2");
  bounds->add_option("--snr,-R", b.snr, "Gradient signal-to-noise ratio R");
  bounds->add_option("--gamma", b.gamma, "Positive integer gamma");
  bounds->add_option("--rounds,-N", b.rounds, "Total rounds N");
  bounds->add_option("--l1-smooth", b.l1_smooth, "||L||_1");
  bounds->add_option("--l1-sigma", b.l1_sigma, "||sigma||_1");
  bounds->add_option("--gap", b.gap, "F(w0) - F*");
  bounds->add_option("--batch-size", b.batch, "Mini-batch size d_b");
  bounds->add_flag("--strict-derivation", b.strict, "Keep the 1/sqrt(d_b) factor on the noise term");
  bounds->add_option("--votes", b.votes, "Votes on the bin");
  bounds->add_option("--theta", b.theta, "Mean transmit power");
  bounds->add_option("--noise-var", b.noise_var, "Noise variance sigma_n^2");

  std::string plot_input, plot_scheme, plot_output;
  auto* plot = app.add_subcommand("plot-data", "Convert metrics JSONL to round,scheme,accuracy CSV");
  plot->add_option("--input,-i", plot_input, "Metrics JSONL file")->required();
  plot->add_option("--scheme", plot_scheme, "Scheme label (read from the summary CSV if omitted)");
  plot->add_option("--output,-o", plot_output, "Write CSV here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidation;
  }

  try {
    if (*train) return cmd_train(config_path, train_output, train_seed, out);
    if (*verify) return cmd_mc_verify(suite, trials, mc_seed, out);
    if (*bounds) return cmd_bounds(b, out);
    if (*plot) return cmd_plot_data(plot_input, plot_scheme, plot_output, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {  // ArgumentError, DimensionError, CapacityError
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConsistencyError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  return kValidation;
}

}  // namespace ncota
