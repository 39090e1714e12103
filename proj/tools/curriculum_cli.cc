// tools/curriculum_cli.cc

// Copyright 2026  The ctc-curriculum Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: generate corpora, train one strategy, compare logs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "curriculum/dataset.h"
#include "curriculum/harness.h"

namespace fs = std::filesystem;
using namespace curriculum;

namespace {

struct GenerateArgs {
  CorpusSpec spec;
  std::string out_dir = ".";
};

struct TrainArgs {
  ExperimentConfig config;
  std::string strategy = "baseline";
  std::string train_path, valid_path, words_path, out_path, checkpoint_path;
};

struct CompareArgs {
  std::vector<std::string> logs;
  double threshold = 1.0;
  std::uint64_t eval_every = 50000;
  std::string baseline = "baseline";
  std::string out_path;
};

int run_generate(const GenerateArgs& args) {
  fs::create_directories(args.out_dir);
  const SplitCorpus corpus = generate_corpus(args.spec);
  const Corpus words = split_into_words(corpus.train);
  const fs::path dir(args.out_dir);
  save_corpus((dir / "train.jsonl").string(), corpus.train);
  save_corpus((dir / "valid.jsonl").string(), corpus.valid);
  save_corpus((dir / "words.jsonl").string(), words);
  std::cout << "train: " << corpus.train.samples.size() << " lines, "
            << corpus.train.total_target_chars() << " target chars\n"
            << "valid: " << corpus.valid.samples.size() << " lines, "
            << corpus.valid.total_target_chars() << " target chars\n"
            << "words: " << words.samples.size() << " words, "
            << words.total_target_chars() << " target chars\n";
  return 0;
}

int run_train(TrainArgs& args) {
  ExperimentConfig& cfg = args.config;
  cfg.strategy = parse_strategy(args.strategy);
  const Corpus train = load_corpus(args.train_path);
  const Corpus valid = load_corpus(args.valid_path);
  cfg.model.input_dim = train.input_dim;
  cfg.model.alphabet_size = train.alphabet_size;
  Corpus words;
  if (cfg.strategy == Strategy::kByHand) {
    if (args.words_path.empty())
      throw std::invalid_argument("--words is required for --strategy by_hand");
    words = load_corpus(args.words_path);
  }
  if (!args.out_path.empty())
    cfg.abort_checkpoint = args.out_path + ".abort.json";
  else if (!args.checkpoint_path.empty())
    cfg.abort_checkpoint = args.checkpoint_path + ".abort.json";

  ExperimentResult result;
  try {
    result = run_experiment(cfg, train, valid,
                            cfg.strategy == Strategy::kByHand ? &words : nullptr);
  } catch (const TrainingAborted& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  if (args.out_path.empty()) {
    write_csv(std::cout, result.points);
  } else {
    std::ofstream out(args.out_path);
    if (!out) throw std::runtime_error("cannot write " + args.out_path);
    write_csv(out, result.points);
  }
  if (!args.checkpoint_path.empty())
    save_checkpoint(args.checkpoint_path,
                    {cfg.model, cfg.seed, result.final_parameters, ""});
  std::cerr << "best valid normNLL " << result.best_valid_norm_nll.value << " at "
            << result.best_valid_norm_nll.browsed_targets << " browsed targets\n"
            << "best valid CER " << result.best_valid_cer.value << " at "
            << result.best_valid_cer.browsed_targets << " browsed targets\n";
  if (result.switched_at)
    std::cerr << "switched to lines at " << *result.switched_at
              << " browsed targets\n";
  return 0;
}

int run_compare(const CompareArgs& args) {
  std::vector<std::pair<std::string, std::vector<ConvergencePoint>>> logs;
  for (const auto& spec : args.logs) {
    // NAME=PATH, or PATH named after its file stem.
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos
                                 ? fs::path(spec).stem().string()
                                 : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    logs.emplace_back(name, read_csv(in));
  }
  const auto summary =
      compare_strategies(logs, args.threshold, args.eval_every, args.baseline);
  if (args.out_path.empty()) {
    write_summary(std::cout, summary);
  } else {
    std::ofstream out(args.out_path);
    write_summary(out, summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Length-based curriculum training for CTC recurrent networks"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log every evaluation point");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic line corpus");
  generate->add_option("--out", gen.out_dir, "Output directory")->capture_default_str();
  generate->add_option("--seed", gen.spec.seed)->capture_default_str();
  generate->add_option("--n-train", gen.spec.n_train)->capture_default_str();
  generate->add_option("--n-valid", gen.spec.n_valid)->capture_default_str();
  generate->add_option("--alphabet-size", gen.spec.alphabet_size,
                       "Labels including the space")->capture_default_str();
  generate->add_option("--input-dim", gen.spec.input_dim)->capture_default_str();
  generate->add_option("--noise-sigma", gen.spec.noise_sigma)->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train one strategy and log convergence");
  train->add_option("--strategy", tr.strategy)
      ->check(CLI::IsMember({"baseline", "curriculum", "by_hand"}))
      ->capture_default_str();
  train->add_option("--lambda-start", tr.config.lambda_start)->capture_default_str();
  train->add_option("--decay-epochs", tr.config.decay_epochs)->capture_default_str();
  train->add_option("--m-min", tr.config.m_min)->capture_default_str();
  train->add_option("--lr", tr.config.model.learning_rate)->capture_default_str();
  train->add_option("--hidden-dim", tr.config.model.hidden_dim)->capture_default_str();
  train->add_option("--epochs", tr.config.total_epochs)->capture_default_str();
  train->add_option("--budget", tr.config.budget_targets,
                    "Browsed-target budget; overrides --epochs when nonzero");
  train->add_option("--eval-every", tr.config.eval_every_targets)->capture_default_str();
  train->add_option("--seed", tr.config.seed)->capture_default_str();
  train->add_option("--min-delta", tr.config.min_delta)->capture_default_str();
  train->add_option("--patience", tr.config.patience)->capture_default_str();
  train->add_option("--train", tr.train_path)->required();
  train->add_option("--valid", tr.valid_path)->required();
  train->add_option("--words", tr.words_path);
  train->add_option("--out", tr.out_path, "CSV log (stdout when omitted)");
  train->add_option("--checkpoint", tr.checkpoint_path, "Final model checkpoint");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Summarize convergence logs");
  compare->add_option("logs", cmp.logs, "NAME=PATH or PATH")->required();
  compare->add_option("--threshold", cmp.threshold, "Target valid normNLL")
      ->capture_default_str();
  compare->add_option("--eval-every", cmp.eval_every)->capture_default_str();
  compare->add_option("--baseline", cmp.baseline)->capture_default_str();
  compare->add_option("--out", cmp.out_path);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*generate) return run_generate(gen);
    if (*train) return run_train(tr);
    if (*compare) return run_compare(cmp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
