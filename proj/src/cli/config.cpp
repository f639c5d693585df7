#include "rnng/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef RNNG_VERSION
#define RNNG_VERSION "0.0.0"
#endif

namespace rnng::cli {

namespace fs = std::filesystem;

std::string version_string() { return std::string("rnng ") + RNNG_VERSION; }

const Schema& run_schema() {
  static const Schema schema = {
      {"seed", ValueType::Int, "1", "base seed for every random stream"},
      {"threads", ValueType::Int, "0", "worker threads; 0 uses every core"},
      {"log_level", ValueType::String, "info", "trace, debug, info, warn, error or off"},
      {"out_dir", ValueType::Path, ".", "directory for outputs"},

      {"train_trees", ValueType::Path, "", "bracketed training trees"},
      {"dev_trees", ValueType::Path, "", "bracketed development trees"},
      {"gold_trees", ValueType::Path, "", "bracketed reference trees"},
      {"input", ValueType::Path, "", "tokenized sentences, one per line"},
      {"min_count", ValueType::Int, "2", "words seen fewer times map to unknown classes"},

      {"variant", ValueType::String, "full", "full or no-comp"},
      {"embedding", ValueType::Int, "170", "word and nonterminal embedding size"},
      {"hidden", ValueType::Int, "170", "stack LSTM size"},
      {"scorer_hidden", ValueType::Int, "170", "hidden layer of each action scorer"},
      {"composition_hidden", ValueType::Int, "170", "composition BiLSTM size"},
      {"max_open", ValueType::Int, "40", "most constituents open at once"},
      {"model", ValueType::Path, "", "RNNG checkpoint (default <out_dir>/model.ckpt)"},

      {"epochs", ValueType::Int, "50", "RNNG training epochs"},
      {"batch_size", ValueType::Int, "10", "sentences per update"},
      {"learning_rate", ValueType::Real, "0.001", "Adam step size"},
      {"clip", ValueType::Real, "5", "global gradient-norm clip; 0 disables"},
      {"dropout", ValueType::Real, "0", "dropout on the stack summary during training"},

      {"lm_embedding", ValueType::Int, "256", "LM embedding size"},
      {"lm_hidden", ValueType::Int, "256", "LM LSTM size"},
      {"lm_epochs", ValueType::Int, "50", "LM training epochs"},
      {"lm_batch_size", ValueType::Int, "10", "LM sentences per update"},
      {"lm_learning_rate", ValueType::Real, "0.001", "LM Adam step size"},
      {"lm_dropout", ValueType::Real, "0", "dropout on the LM hidden state during training"},
      {"lm_model", ValueType::Path, "", "LM checkpoint (default <out_dir>/lm.ckpt)"},

      {"beam", ValueType::Int, "100", "action beam k"},
      {"word_beam", ValueType::IntOrAuto, "auto", "word beam; auto is k/10"},
      {"fast_track", ValueType::IntOrAuto, "auto", "fast-track width; auto is k/100"},
      {"max_iterations", ValueType::Int, "80", "search passes allowed per word"},
      {"sweep_k", ValueType::IntList, "10,20,50,100,200", "action beams for sweep"},
      {"emit_metrics", ValueType::Path, "", "metrics table (default <out_dir>/metrics.tsv)"},
      {"emit_trees", ValueType::Path, "", "best trees (default <out_dir>/trees.txt)"},
      {"function_words", ValueType::Path, "", "stop list, one word per line (default built in)"},
      {"predicted", ValueType::Path, "", "bracketed trees to score"},
      {"lm_out", ValueType::Path, "", "surprisal rows (default stdout)"},

      {"epoch_bundle", ValueType::Path, "", "epoch bundle stem (<stem>.bin and <stem>.tsv)"},
      {"metrics", ValueType::PathList, "", "metrics tables joined to epochs on sent and idx"},
      {"k_labels", ValueType::List, "", "beam label per metrics table (default from file name)"},
      {"target", ValueType::List, "surprisal", "predictors tested one at a time"},
      {"controls", ValueType::List, "", "control predictors"},
      {"n_perm", ValueType::Int, "1000", "permutations per cluster test"},
      {"threshold_p", ValueType::Real, "0.05", "two-sided cluster-forming level"},
      {"roi", ValueType::String, "N400", "N400, P600, ANT or custom"},
      {"roi_channels", ValueType::List, "", "channels of a custom region"},
      {"roi_from", ValueType::Real, "0.3", "custom region start (s)"},
      {"roi_to", ValueType::Real, "0.5", "custom region end (s)"},
      {"content_only", ValueType::Bool, "true", "restrict to content-word epochs"},

      {"synth_spec", ValueType::Path, "", "effect specification file"},
      {"synth_out", ValueType::Path, "epochs", "bundle stem, relative to out_dir"},

      {"grad_seeds", ValueType::Int, "20", "random seeds per gradient check"},
      {"grad_tolerance", ValueType::Real, "0.0001", "largest acceptable relative error"},
  };
  return schema;
}

const Schema& synth_schema() {
  static const Schema schema = {
      {"subjects", ValueType::Int, "20", ""},
      {"epochs_per_subject", ValueType::Int, "100", ""},
      {"n_channels", ValueType::Int, "61", "61, 16 or any count (grid)"},
      {"sample_rate", ValueType::Real, "500", ""},
      {"t_start", ValueType::Real, "-0.3", ""},
      {"t_end", ValueType::Real, "1.0", ""},
      {"noise_sd", ValueType::Real, "1", ""},
      {"subject_effect_sd", ValueType::Real, "0.25", ""},
      {"controls", ValueType::List, "word_order,log_freq", ""},
      {"predictor", ValueType::String, "target", ""},
      {"effect_channels", ValueType::List, "Cz,CP1,CP2,Pz", ""},
      {"effect_from", ValueType::Real, "0.3", ""},
      {"effect_to", ValueType::Real, "0.5", ""},
      {"amplitude", ValueType::Real, "0", ""},
      {"seed", ValueType::Int, "1", ""},
  };
  return schema;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<std::int64_t> to_int(const std::string& s) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> to_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

std::optional<std::string> type_problem(const KeySpec& spec, const std::string& v) {
  switch (spec.type) {
    case ValueType::Int:
      if (!to_int(v)) return "expected an integer";
      break;
    case ValueType::Real:
      if (!to_real(v)) return "expected a number";
      break;
    case ValueType::Bool:
      if (!to_bool(v)) return "expected true or false";
      break;
    case ValueType::IntOrAuto:
      if (v != "auto" && (!to_int(v) || *to_int(v) < 0)) return "expected auto or a non-negative integer";
      break;
    case ValueType::IntList:
      for (const auto& item : split_list(v)) {
        if (!to_int(item) || *to_int(item) <= 0) return "expected a comma-separated list of positive integers";
      }
      break;
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = std::to_string(problems.size()) + " configuration problem" + (problems.size() == 1 ? "" : "s");
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

Config::Config(const Schema& schema) : schema_(&schema) {}

const KeySpec* Config::find(const std::string& key) const {
  for (const auto& k : *schema_) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

void Config::load_file(const fs::path& path) {
  std::vector<fs::path> chain;
  load_file(path, chain);
}

void Config::load_file(const fs::path& path, std::vector<fs::path>& chain) {
  const fs::path canonical = fs::weakly_canonical(path);
  if (std::find(chain.begin(), chain.end(), canonical) != chain.end()) {
    problems_.push_back(path.string() + ": include cycle");
    return;
  }
  std::ifstream in(path);
  if (!in) {
    problems_.push_back(path.string() + ": cannot open");
    return;
  }
  chain.push_back(canonical);
  const fs::path base = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("include", 0) == 0 && (line.size() == 7 || std::isspace(static_cast<unsigned char>(line[7])))) {
      const std::string target = trim(line.substr(7));
      if (target.empty()) {
        problems_.push_back(where + ": include needs a path");
        continue;
      }
      const fs::path p(target);
      load_file(p.is_absolute() ? p : base / p, chain);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems_.push_back(where + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const KeySpec* spec = find(key);
    if (!spec) {
      problems_.push_back(where + ": unknown key '" + key + "'");
      continue;
    }
    if (!value.empty() && (spec->type == ValueType::Path || spec->type == ValueType::PathList)) {
      std::string joined;
      for (const auto& item : spec->type == ValueType::Path ? std::vector<std::string>{value} : split_list(value)) {
        const fs::path p(item);
        if (!joined.empty()) joined += ",";
        joined += (p.is_absolute() ? p : (base / p)).lexically_normal().string();
      }
      value = joined;
    }
    set(key, value, where);
  }
  chain.pop_back();
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  values_[key] = value;
  origins_[key] = origin;
}

void Config::check() const {
  std::vector<std::string> problems = problems_;
  for (const auto& [key, value] : values_) {
    const KeySpec* spec = find(key);
    const std::string& origin = origins_.at(key);
    if (!spec) {
      problems.push_back(origin + ": unknown key '" + key + "'");
    } else if (auto p = type_problem(*spec, value)) {
      problems.push_back(origin + ": " + key + " = '" + value + "': " + *p);
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::string Config::raw(const std::string& key) const {
  const KeySpec* spec = find(key);
  if (!spec) throw std::logic_error("no configuration key '" + key + "'");
  auto it = values_.find(key);
  return it != values_.end() ? it->second : spec->default_value;
}

std::int64_t Config::get_int(const std::string& key) const {
  const auto v = to_int(raw(key));
  if (!v) throw ConfigError({key + " = '" + raw(key) + "': expected an integer"});
  return *v;
}

std::size_t Config::get_size(const std::string& key) const {
  const std::int64_t v = get_int(key);
  if (v < 0) throw ConfigError({key + " = " + std::to_string(v) + ": must not be negative"});
  return static_cast<std::size_t>(v);
}

double Config::get_real(const std::string& key) const {
  const auto v = to_real(raw(key));
  if (!v) throw ConfigError({key + " = '" + raw(key) + "': expected a number"});
  return *v;
}

bool Config::get_bool(const std::string& key) const {
  const auto v = to_bool(raw(key));
  if (!v) throw ConfigError({key + " = '" + raw(key) + "': expected true or false"});
  return *v;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

fs::path Config::get_path(const std::string& key) const { return fs::path(raw(key)); }

std::vector<fs::path> Config::get_paths(const std::string& key) const {
  std::vector<fs::path> out;
  for (const auto& s : split_list(raw(key))) out.emplace_back(s);
  return out;
}

std::vector<std::string> Config::get_list(const std::string& key) const { return split_list(raw(key)); }

std::vector<std::size_t> Config::get_int_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(raw(key))) {
    const auto v = to_int(s);
    if (!v || *v <= 0) throw ConfigError({key + ": '" + s + "' is not a positive integer"});
    out.push_back(static_cast<std::size_t>(*v));
  }
  return out;
}

std::optional<std::size_t> Config::get_auto(const std::string& key) const {
  const std::string v = raw(key);
  if (v == "auto") return std::nullopt;
  return get_size(key);
}

std::string Config::resolved_text(const std::string& command) const {
  std::ostringstream out;
  out << "# " << version_string() << "\n";
  out << "# command: " << command << "\n";
  for (const auto& spec : *schema_) out << spec.name << " = " << raw(spec.name) << "\n";
  return out.str();
}

void Config::write_resolved(const fs::path& dir, const std::string& command) const {
  fs::create_directories(dir);
  std::ofstream out(dir / "resolved.cfg", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "resolved.cfg").string());
  out << resolved_text(command);
}

}  // namespace rnng::cli
