#include "izf/cli/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "izf/errors.hpp"
#include "izf/numcore/text.hpp"

namespace izf::cli {

namespace {

using numcore::format_double;

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

double parse_real(const std::string& v) {
  double out = 0.0;
  if (!numcore::parse_double(v, out)) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

long long parse_int(const std::string& v) {
  long long out = 0;
  if (!numcore::parse_long(v, out)) throw ConfigError("expected an integer, got '" + v + "'");
  return out;
}

std::size_t parse_count(const std::string& v) {
  const auto n = parse_int(v);
  if (n < 0) throw ConfigError("expected a non-negative count, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  if (numcore::trim(v).empty()) return out;
  for (auto item : numcore::split(v, ',')) {
    auto t = numcore::trim(item);
    if (t.empty()) throw ConfigError("empty entry in list '" + v + "'");
    out.emplace_back(t);
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"command", [](RunConfig& c, const std::string& v) { c.command = v; },
       [](const RunConfig& c) { return c.command; }},
      {"dataset", [](RunConfig& c, const std::string& v) { c.dataset = v; },
       [](const RunConfig& c) { return c.dataset.string(); }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
       [](const RunConfig& c) { return c.output_dir.string(); }},
      {"checkpoint", [](RunConfig& c, const std::string& v) { c.checkpoint = v; },
       [](const RunConfig& c) { return c.checkpoint.string(); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_count(v)); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},

      {"n_blocks", [](RunConfig& c, const std::string& v) { c.flow.n_blocks = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.flow.n_blocks); }},
      {"s_clamp", [](RunConfig& c, const std::string& v) { c.flow.s_clamp = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.flow.s_clamp); }},
      {"leaky_slope", [](RunConfig& c, const std::string& v) { c.flow.leaky_slope = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.flow.leaky_slope); }},
      {"output_init_scale", [](RunConfig& c, const std::string& v) { c.flow.output_init_scale = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.flow.output_init_scale); }},

      {"lambda1", [](RunConfig& c, const std::string& v) { c.train.weights.lambda1 = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.weights.lambda1); }},
      {"lambda2", [](RunConfig& c, const std::string& v) { c.train.weights.lambda2 = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.weights.lambda2); }},
      {"lambda3", [](RunConfig& c, const std::string& v) { c.train.weights.lambda3 = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.weights.lambda3); }},
      {"kernel", [](RunConfig& c, const std::string& v) { c.train.kernel.kind = losses::kernel_kind_from_string(v); },
       [](const RunConfig& c) { return losses::to_string(c.train.kernel.kind); }},
      {"bandwidth",
       [](RunConfig& c, const std::string& v) {
         if (v.empty() || v == "auto") {
           c.train.kernel.bandwidth.reset();
         } else {
           c.train.kernel.bandwidth = parse_real(v);
         }
       },
       [](const RunConfig& c) {
         return c.train.kernel.bandwidth ? format_double(*c.train.kernel.bandwidth) : std::string("auto");
       }},
      {"learning_rate", [](RunConfig& c, const std::string& v) { c.train.learning_rate = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.learning_rate); }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.train.batch_size); }},
      {"epochs", [](RunConfig& c, const std::string& v) { c.train.epochs = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.train.epochs); }},
      {"adam_beta1", [](RunConfig& c, const std::string& v) { c.train.adam_beta1 = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.adam_beta1); }},
      {"adam_beta2", [](RunConfig& c, const std::string& v) { c.train.adam_beta2 = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.adam_beta2); }},
      {"adam_eps", [](RunConfig& c, const std::string& v) { c.train.adam_eps = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.adam_eps); }},
      {"ablation", [](RunConfig& c, const std::string& v) { c.train.ablation = trainer::ablation_from_string(v); },
       [](const RunConfig& c) { return trainer::to_string(c.train.ablation); }},
      {"grad_clip", [](RunConfig& c, const std::string& v) { c.train.grad_clip = parse_bool(v); },
       [](const RunConfig& c) { return bool_text(c.train.grad_clip); }},
      {"grad_clip_norm", [](RunConfig& c, const std::string& v) { c.train.grad_clip_norm = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.grad_clip_norm); }},
      {"minmax", [](RunConfig& c, const std::string& v) { c.minmax = parse_bool(v); },
       [](const RunConfig& c) { return bool_text(c.minmax); }},
      {"log_wall_clock", [](RunConfig& c, const std::string& v) { c.log_wall_clock = parse_bool(v); },
       [](const RunConfig& c) { return bool_text(c.log_wall_clock); }},
      {"checkpoint_interval", [](RunConfig& c, const std::string& v) { c.checkpoint_interval = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.checkpoint_interval); }},

      {"mode",
       [](RunConfig& c, const std::string& v) {
         c.modes.clear();
         for (const auto& m : parse_list(v == "both" ? "nbc,softmax" : v)) c.modes.push_back(classify::mode_from_string(m));
       },
       [](const RunConfig& c) { return join(c.modes, [](auto m) { return classify::to_string(m); }); }},
      {"setting",
       [](RunConfig& c, const std::string& v) {
         c.settings.clear();
         for (const auto& s : parse_list(v == "both" ? "czsl,gzsl" : v))
           c.settings.push_back(classify::setting_from_string(s));
       },
       [](const RunConfig& c) { return join(c.settings, [](auto s) { return classify::to_string(s); }); }},
      {"per_class", [](RunConfig& c, const std::string& v) { c.eval.per_class = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.eval.per_class); }},
      {"softmax_epochs", [](RunConfig& c, const std::string& v) { c.eval.softmax.epochs = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.eval.softmax.epochs); }},
      {"softmax_learning_rate", [](RunConfig& c, const std::string& v) { c.eval.softmax.learning_rate = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.eval.softmax.learning_rate); }},
      {"softmax_batch_size", [](RunConfig& c, const std::string& v) { c.eval.softmax.batch_size = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.eval.softmax.batch_size); }},

      {"classes",
       [](RunConfig& c, const std::string& v) {
         c.classes.clear();
         for (const auto& s : parse_list(v)) c.classes.push_back(static_cast<int>(parse_int(s)));
       },
       [](const RunConfig& c) { return join(c.classes, [](int i) { return std::to_string(i); }); }},
      {"zero_latent", [](RunConfig& c, const std::string& v) { c.zero_latent = parse_bool(v); },
       [](const RunConfig& c) { return bool_text(c.zero_latent); }},

      {"toy_samples", [](RunConfig& c, const std::string& v) { c.toy_samples = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.toy_samples); }},
      {"toy_generated", [](RunConfig& c, const std::string& v) { c.toy_generated = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.toy_generated); }},
      {"toy_variants", [](RunConfig& c, const std::string& v) { c.toy_variants = parse_list(v); },
       [](const RunConfig& c) { return join(c.toy_variants, [](const std::string& s) { return s; }); }},

      {"sweep_params", [](RunConfig& c, const std::string& v) { c.sweep_params = parse_list(v); },
       [](const RunConfig& c) { return join(c.sweep_params, [](const std::string& s) { return s; }); }},
      {"sweep_values",
       [](RunConfig& c, const std::string& v) {
         c.sweep_values.clear();
         for (const auto& s : parse_list(v)) c.sweep_values.push_back(parse_real(s));
       },
       [](const RunConfig& c) { return join(c.sweep_values, [](double d) { return format_double(d); }); }},
      {"sweep_blocks",
       [](RunConfig& c, const std::string& v) {
         c.sweep_blocks.clear();
         for (const auto& s : parse_list(v)) c.sweep_blocks.push_back(parse_count(s));
       },
       [](const RunConfig& c) { return join(c.sweep_blocks, [](std::size_t n) { return std::to_string(n); }); }},
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text, const std::string& origin) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto t = numcore::trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + " line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = std::string(numcore::trim(t.substr(0, eq)));
    if (key.empty()) throw ConfigError(origin + " line " + std::to_string(line_no) + ": missing key");
    out[key] = std::string(numcore::trim(t.substr(eq + 1)));
  }
  return out;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.filename().string());
}

RunConfig defaults_for(const std::string& command) {
  RunConfig c;
  c.command = command;
  if (command == "toy" || command == "sweep") {
    // the toy set has 1200 training samples; smaller batches give the
    // optimizer enough steps within the 200-epoch budget
    c.train.epochs = 200;
    c.train.batch_size = 64;
    c.minmax = false;
  }
  if (command == "sweep") c.modes = {classify::Mode::nbc, classify::Mode::softmax};
  if (command == "sweep") c.settings = {classify::Setting::gzsl};
  return c;
}

void apply(RunConfig& config, const ConfigMap& entries, const std::string& origin) {
  for (const auto& [name, value] : entries) {
    const Key* key = find_key(name);
    if (!key) throw ConfigError(origin + ": unknown key '" + name + "'");
    try {
      key->set(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ": " + name + ": " + e.what());
    }
  }
}

RunConfig resolve(const std::string& command, const ConfigMap& file_entries, const ConfigMap& cli_entries) {
  RunConfig c = defaults_for(command);
  apply(c, file_entries, "config file");
  apply(c, cli_entries, "command line");
  c.command = command;
  c.train.seed = c.seed;
  c.eval.seed = c.seed;
  trainer::validate(c.train);
  if (c.flow.n_blocks == 0) throw ConfigError("n_blocks must be at least 1");
  if (!(c.flow.s_clamp > 0.0)) throw ConfigError("s_clamp must be positive");
  if (!(c.flow.leaky_slope > 0.0 && c.flow.leaky_slope < 1.0)) throw ConfigError("leaky_slope must lie in (0, 1)");
  if (c.eval.per_class == 0) throw ConfigError("per_class must be at least 1");
  if (c.modes.empty() || c.settings.empty()) throw ConfigError("mode and setting lists must not be empty");
  return c;
}

ConfigMap to_map(const RunConfig& config) {
  ConfigMap out;
  for (const auto& k : keys()) out[k.name] = k.get(config);
  return out;
}

std::string snapshot_text(const RunConfig& config) {
  std::string out = "# resolved configuration\n";
  for (const auto& k : keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

void write_snapshot(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << snapshot_text(config);
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.name);
  return out;
}

}  // namespace izf::cli
