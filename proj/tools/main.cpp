#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mkge/commands.hpp"
#include "mkge/config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")
      ->required();
  cmd->add_option("--set", args.overrides,
                  "override a config entry, section.key=value");
  cmd->add_option("--seed", args.seed, "override the run seed");
  cmd->add_option("--out", args.out, "override the output directory");
  cmd->add_option("--format", args.format, "report format: text or kv");
}

mkge::RunConfig build_config(const CommonArgs& args) {
  mkge::RunConfig config = mkge::load_run_config(args.config_path);
  for (const std::string& entry : args.overrides) {
    std::size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw mkge::Error("config: --set expects section.key=value, got '" +
                        entry + "'");
    mkge::apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
  }
  if (!args.seed.empty()) mkge::apply_config_entry(config, "seed", args.seed);
  if (!args.out.empty()) mkge::apply_config_entry(config, "paths.out", args.out);
  if (!args.format.empty())
    mkge::apply_config_entry(config, "format", args.format);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimodal knowledge graph embeddings"};
  app.require_subcommand(1);

  CommonArgs inspect_args, build_args, train_args, eval_args, zs_args,
      retrieve_args;
  std::string eval_checkpoint, retrieve_checkpoint, retrieve_query;
  int train_epochs = -1;
  int retrieve_k = 0;
  std::string retrieve_mode;

  CLI::App* inspect = app.add_subcommand("inspect", "validate and summarize a graph");
  add_common(inspect, inspect_args);

  CLI::App* build = app.add_subcommand("build-split", "build train/valid/test splits");
  add_common(build, build_args);

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train, train_args);
  train->add_option("--epochs", train_epochs, "override train.epochs");

  CLI::App* eval = app.add_subcommand("eval", "filtered link-prediction metrics");
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", eval_checkpoint, "model checkpoint")
      ->required();

  CLI::App* zs = app.add_subcommand("zero-shot", "cosine-similarity baseline");
  add_common(zs, zs_args);

  CLI::App* retrieve = app.add_subcommand("retrieve", "relatedness retrieval report");
  add_common(retrieve, retrieve_args);
  retrieve->add_option("--checkpoint", retrieve_checkpoint, "model checkpoint")
      ->required();
  retrieve->add_option("--query", retrieve_query, "query entity name")
      ->required();
  retrieve->add_option("--k", retrieve_k, "override list length");
  retrieve->add_option("--mode", retrieve_mode, "artwork or artist");

  CLI11_PARSE(app, argc, argv);

  try {
    if (inspect->parsed())
      return mkge::cmd_inspect(build_config(inspect_args), std::cout);
    if (build->parsed())
      return mkge::cmd_build_split(build_config(build_args), std::cout);
    if (train->parsed()) {
      mkge::RunConfig config = build_config(train_args);
      if (train_epochs >= 0) config.train.epochs = train_epochs;
      return mkge::cmd_train(config, std::cout);
    }
    if (eval->parsed())
      return mkge::cmd_eval(build_config(eval_args), eval_checkpoint,
                            std::cout);
    if (zs->parsed())
      return mkge::cmd_zero_shot(build_config(zs_args), std::cout);
    if (retrieve->parsed()) {
      mkge::RunConfig config = build_config(retrieve_args);
      if (retrieve_k > 0) config.retrieve_k = retrieve_k;
      if (!retrieve_mode.empty())
        mkge::apply_config_entry(config, "retrieve.mode", retrieve_mode);
      return mkge::cmd_retrieve(config, retrieve_checkpoint, retrieve_query,
                                std::cout);
    }
  } catch (const mkge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
