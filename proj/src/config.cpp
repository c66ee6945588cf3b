#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ncota/errors.hpp"
#include "ncota/harness.hpp"

namespace ncota {

Scheme parse_scheme(std::string_view name) {
  if (name == "ideal_signsgd_mv") return Scheme::kIdealSignSgdMv;
  if (name == "fedavg_ideal") return Scheme::kFedAvgIdeal;
  if (name == "fsk_mv") return Scheme::kFskMv;
  if (name == "fsk_mv_dpc") return Scheme::kFskMvDpc;
  throw ArgumentError("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kIdealSignSgdMv: return "ideal_signsgd_mv";
    case Scheme::kFedAvgIdeal: return "fedavg_ideal";
    case Scheme::kFskMv: return "fsk_mv";
    case Scheme::kFskMvDpc: return "fsk_mv_dpc";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (training.num_devices <= 0) throw ConfigError("devices must be positive");
  if (training.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (training.rounds == 0) throw ConfigError("rounds must be positive");
  if (!(training.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (eval_every == 0) throw ConfigError("eval_every must be positive");
  if (phy.subcarriers < 2 || phy.subcarriers % 2 != 0) {
    throw ConfigError("phy.subcarriers must be an even number >= 2");
  }
  if (phy.power_cap && *phy.power_cap < 1.0) throw ConfigError("phy.power_cap must be >= 1");
  if (model.kind == ModelKind::kMlp && model.hidden == 0) throw ConfigError("model.hidden must be positive");
  if (dataset.kind == DatasetKind::kMnist && dataset.path.empty()) {
    throw ConfigError("dataset.path is required for dataset.kind = mnist");
  }
  if (dataset.kind == DatasetKind::kSynthetic &&
      (dataset.samples == 0 || dataset.test_samples == 0 || dataset.input_dim == 0 ||
       dataset.num_classes < 2)) {
    throw ConfigError("dataset.spec needs positive samples, dim and at least 2 classes");
  }
  try {
    channel.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> text(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.push_back(key);
    return it->second.value;
  }

  template <typename T>
  std::optional<T> number(const std::string& key) {
    auto raw = text(key);
    if (!raw) return std::nullopt;
    T value{};
    const char* begin = raw->data();
    const char* end = begin + raw->size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) fail(key, "'" + *raw + "' is not a valid number");
    return value;
  }

  std::optional<bool> boolean(const std::string& key) {
    auto raw = text(key);
    if (!raw) return std::nullopt;
    if (*raw == "true") return true;
    if (*raw == "false") return false;
    fail(key, "expected true or false");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    const auto it = entries_.find(key);
    std::ostringstream msg;
    msg << "config key '" << key << "'";
    if (it != entries_.end()) msg << " (line " << it->second.line << ")";
    msg << ": " << why;
    throw ConfigError(msg.str());
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(entry.line) + ")");
      }
    }
  }

 private:
  std::map<std::string, Entry> entries_;
  std::vector<std::string> used_;
};

// "samples,dim,classes" for synthetic data.
void parse_synthetic_spec(Reader& reader, const std::string& spec, DatasetSpec& out) {
  std::vector<std::size_t> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      reader.fail("dataset.spec", "expected 'samples,dim,classes'");
    }
    parts.push_back(v);
  }
  if (parts.size() != 3) reader.fail("dataset.spec", "expected 'samples,dim,classes'");
  out.samples = parts[0];
  out.input_dim = parts[1];
  out.num_classes = static_cast<int>(parts[2]);
}

template <typename Fn>
auto translate(Reader& reader, const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ArgumentError& e) {
    reader.fail(key, e.what());
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (entries.count(key) != 0) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    entries[key] = {unquote(trim(std::string_view(line).substr(eq + 1))), line_no};
  }

  Reader r(std::move(entries));
  ExperimentConfig cfg;

  if (auto v = r.text("scheme")) cfg.scheme = translate(r, "scheme", [&] { return parse_scheme(*v); });
  if (auto v = r.number<std::size_t>("rounds")) cfg.training.rounds = *v;
  if (auto v = r.number<int>("devices")) cfg.training.num_devices = *v;
  if (auto v = r.number<std::size_t>("batch_size")) cfg.training.batch_size = *v;
  if (auto v = r.number<double>("learning_rate")) cfg.training.learning_rate = *v;
  if (auto v = r.text("partition")) {
    cfg.training.partition_mode = translate(r, "partition", [&] { return parse_partition_mode(*v); });
  }
  if (auto v = r.number<std::uint64_t>("seed")) cfg.training.seed = *v;
  if (auto v = r.number<std::size_t>("eval_every")) cfg.eval_every = *v;
  if (auto v = r.text("output")) cfg.output = *v;
  if (auto v = r.boolean("timing")) cfg.record_wall_time = *v;

  if (auto v = r.text("model")) {
    if (*v == "softmax") cfg.model.kind = ModelKind::kSoftmax;
    else if (*v == "mlp") cfg.model.kind = ModelKind::kMlp;
    else r.fail("model", "expected softmax or mlp");
  }
  if (auto v = r.number<std::size_t>("model.hidden")) cfg.model.hidden = *v;

  if (auto v = r.text("dataset.kind")) {
    if (*v == "synthetic") cfg.dataset.kind = DatasetKind::kSynthetic;
    else if (*v == "mnist") cfg.dataset.kind = DatasetKind::kMnist;
    else r.fail("dataset.kind", "expected synthetic or mnist");
  }
  if (auto v = r.text("dataset.path")) cfg.dataset.path = *v;
  if (auto v = r.text("dataset.spec")) parse_synthetic_spec(r, *v, cfg.dataset);
  if (auto v = r.number<std::size_t>("dataset.test_samples")) cfg.dataset.test_samples = *v;
  if (auto v = r.number<std::size_t>("dataset.train_limit")) cfg.dataset.train_limit = *v;
  if (auto v = r.number<std::uint64_t>("dataset.seed")) cfg.dataset.seed = *v;

  const bool has_noise = r.has("channel.noise_var");
  const bool has_beta = r.has("channel.beta");
  if (has_noise && has_beta) r.fail("channel.beta", "set either channel.noise_var or channel.beta, not both");
  if (auto v = r.number<double>("channel.noise_var")) cfg.channel.noise_variance = *v;
  if (auto v = r.number<double>("channel.beta")) {
    if (!(*v > 0.0)) r.fail("channel.beta", "must be positive");
    // Target beta at the initial mean power of 1.
    cfg.channel.noise_variance = kSymbolEnergy / *v;
  }
  if (auto v = r.number<double>("channel.sync_error_max")) cfg.channel.sync_error_max = *v;
  if (auto v = r.text("channel.fading")) {
    cfg.channel.fading = translate(r, "channel.fading", [&] { return parse_fading_mode(*v); });
  }

  if (auto v = r.number<std::size_t>("phy.subcarriers")) cfg.phy.subcarriers = *v;
  if (r.has("phy.symbols")) {
    if (r.text("phy.symbols") == std::optional<std::string>("auto")) {
      cfg.phy.symbols = 0;
    } else if (auto v = r.number<std::size_t>("phy.symbols")) {
      cfg.phy.symbols = *v;
    }
  }
  if (r.has("phy.power_cap")) {
    if (r.text("phy.power_cap") == std::optional<std::string>("none")) {
      cfg.phy.power_cap.reset();
    } else if (auto v = r.number<double>("phy.power_cap")) {
      cfg.phy.power_cap = *v;
    }
  }
  cfg.channel.fft_size = cfg.phy.subcarriers;
  if (auto v = r.number<std::size_t>("channel.fft_size")) cfg.channel.fft_size = *v;

  r.reject_unused();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

}  // namespace ncota
