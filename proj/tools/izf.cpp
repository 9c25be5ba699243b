#include <CLI11.hpp>

#include <iostream>

#include "izf/cli/commands.hpp"
#include "izf/errors.hpp"
#include "izf/eval/metrics.hpp"
#include "izf/numcore/text.hpp"

namespace {

using izf::cli::ConfigMap;

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Invocation {
  std::string config_file;
  std::vector<std::string> sets;
  ConfigMap entries;
};

void add_common(CLI::App* cmd, Invocation& inv) {
  auto key = [&inv](const std::string& name) {
    return [&inv, name](const std::string& v) { inv.entries[name] = v; };
  };
  auto flag = [&inv](const std::string& name, const std::string& value) {
    return [&inv, name, value](std::int64_t) { inv.entries[name] = value; };
  };
  cmd->add_option("--config", inv.config_file, "key = value configuration file");
  cmd->add_option("--set", inv.sets, "override any configuration key, as key=value")->take_all();
  cmd->add_option_function<std::string>("--dataset", key("dataset"), "dataset manifest (JSON)");
  cmd->add_option_function<std::string>("-o,--output-dir", key("output_dir"), "directory for all outputs");
  cmd->add_option_function<std::string>("--checkpoint", key("checkpoint"), "model checkpoint to load");
  cmd->add_option_function<std::string>("--seed", key("seed"));
  cmd->add_option_function<std::string>("--epochs", key("epochs"));
  cmd->add_option_function<std::string>("--batch-size", key("batch_size"));
  cmd->add_option_function<std::string>("--lr", key("learning_rate"));
  cmd->add_option_function<std::string>("--lambda1", key("lambda1"));
  cmd->add_option_function<std::string>("--lambda2", key("lambda2"));
  cmd->add_option_function<std::string>("--lambda3", key("lambda3"));
  cmd->add_option_function<std::string>("--kernel", key("kernel"), "inverse_multiquadratic (im) or gaussian");
  cmd->add_option_function<std::string>("--bandwidth", key("bandwidth"), "kernel bandwidth, or auto");
  cmd->add_option_function<std::string>("--ablation", key("ablation"),
                                        "none, no_lc, no_immd, no_lc_no_immd or positive_mmd");
  cmd->add_option_function<std::string>("--n-blocks", key("n_blocks"));
  cmd->add_option_function<std::string>("--mode", key("mode"), "nbc, softmax or both");
  cmd->add_option_function<std::string>("--setting", key("setting"), "czsl, gzsl or both");
  cmd->add_option_function<std::string>("--per-class", key("per_class"), "synthetic samples per class");
  cmd->add_option_function<std::string>("--classes", key("classes"), "comma separated class ids");
  cmd->add_flag_function("--zero-latent", flag("zero_latent", "true"), "generate with z_f = 0");
  cmd->add_flag_function("--no-grad-clip", flag("grad_clip", "false"), "disable global-norm gradient clipping");
  cmd->add_flag_function("--no-wall-clock", flag("log_wall_clock", "false"), "write 0 for wall_seconds in logs");
  cmd->add_option_function<std::string>("--variants", key("toy_variants"), "toy variants to run");
  cmd->add_option_function<std::string>("--sweep-params", key("sweep_params"));
  cmd->add_option_function<std::string>("--sweep-values", key("sweep_values"));
  cmd->add_option_function<std::string>("--sweep-blocks", key("sweep_blocks"));
}

izf::cli::RunConfig resolve(const std::string& command, const Invocation& inv) {
  ConfigMap cli = inv.entries;
  for (const auto& s : inv.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw izf::ConfigError("--set expects key=value, got '" + s + "'");
    cli[std::string(izf::numcore::trim(s.substr(0, eq)))] = std::string(izf::numcore::trim(s.substr(eq + 1)));
  }
  ConfigMap file;
  if (!inv.config_file.empty()) file = izf::cli::load_config_file(inv.config_file);
  return izf::cli::resolve(command, file, cli);
}

void print_reports(const std::vector<izf::cli::EvalRun>& runs, const std::vector<std::string>& names) {
  for (const auto& r : runs) {
    izf::eval::write_report_text(r.outcome.report, names, std::cout);
    std::cout << '\n';
  }
}

std::string pct(const std::optional<double>& v) { return v ? izf::eval::percent(*v) : "-"; }

int dispatch(const std::string& command, const Invocation& inv) {
  using namespace izf::cli;
  const RunConfig config = resolve(command, inv);
  if (command == "toy") {
    auto result = run_toy(config);
    std::cout << "variant         lambda3  dist(1,1)  flag";
    for (auto m : config.modes)
      for (auto s : config.settings) std::cout << "  " << izf::classify::to_string(m) << '/' << izf::classify::to_string(s);
    std::cout << '\n';
    for (const auto& v : result.variants) {
      std::cout << v.name << std::string(v.name.size() < 16 ? 16 - v.name.size() : 1, ' ')
                << izf::numcore::format_fixed(v.weights.lambda3, 2) << "     "
                << (v.diverged ? std::string("diverged") : izf::numcore::format_fixed(v.unseen_distance, 3)) << "      "
                << (v.failure_flag ? "yes" : "no") << (v.off_target ? " (off target)" : "");
      for (const auto& e : v.evals) {
        std::cout << "  u=" << izf::eval::percent(e.outcome.report.a_unseen);
        if (e.outcome.report.harmonic) std::cout << " H=" << pct(e.outcome.report.harmonic);
      }
      std::cout << '\n';
    }
    std::cout << "outputs in " << config.output_dir.string() << '\n';
  } else if (command == "train") {
    auto run = run_train(config);
    for (const auto& e : run.epochs) {
      std::cout << "epoch " << e.epoch << "  l_flow " << izf::numcore::format_fixed(e.l_flow, 4) << "  l_c "
                << izf::numcore::format_fixed(e.l_c, 4) << "  l_immd " << izf::numcore::format_fixed(e.l_immd, 4)
                << "  total " << izf::numcore::format_fixed(e.total, 4) << '\n';
    }
    std::cout << "model written to " << run.model_path.string() << '\n';
  } else if (command == "eval") {
    auto runs = run_eval(config);
    print_reports(runs, prepare_dataset(config).class_names);
  } else if (command == "generate") {
    std::cout << "generated features written to " << run_generate(config).string() << '\n';
  } else if (command == "sweep") {
    auto points = run_sweep(config);
    for (const auto& p : points) {
      std::cout << p.param << '=' << p.value;
      if (p.diverged) std::cout << "  diverged";
      for (const auto& s : p.scores)
        std::cout << "  " << izf::classify::to_string(s.mode) << " H=" << izf::eval::percent(s.harmonic);
      std::cout << '\n';
    }
    std::cout << "sweep table written to " << (config.output_dir / "sweep.csv").string() << '\n';
  } else if (command == "dataset") {
    std::cout << dataset_summary(config);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invertible zero-shot flow: training, evaluation and toy experiments"};
  app.require_subcommand(1);
  Invocation inv;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"toy", "train and evaluate the four-class toy problem with its ablation variants"},
      {"train", "train a flow on a dataset manifest"},
      {"eval", "evaluate a checkpoint (NBC and/or softmax, CZSL and/or GZSL)"},
      {"generate", "write synthetic visual features for chosen classes"},
      {"sweep", "vary one hyperparameter at a time and tabulate GZSL scores"},
      {"dataset", "validate a manifest and print its summary"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, inv);
  } catch (const izf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const izf::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const izf::LoadError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const izf::ContractError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const izf::DimensionError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
