// biparse: train, parse, evaluate and run sharing-strategy experiments.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
// BIPARSE_DETERMINISTIC=1 runs kernels on one thread and jobs one at a time.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "biparse/common.h"
#include "biparse/conllu.h"
#include "biparse/evaluation.h"
#include "biparse/experiment.h"
#include "biparse/kernels.h"
#include "biparse/synthetic.h"
#include "biparse/training.h"
#include "biparse/transition.h"

using namespace biparse;
namespace fs = std::filesystem;

namespace {

struct ExperimentArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string languages, strategy, seeds, output;
  std::vector<std::string> train, dev, test;
  std::size_t epochs = 0, sample_size = 0, jobs = 0;
  bool synthetic = false;
};

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("-c,--config", a.config, "key = value experiment file");
  cmd->add_option("-s,--set", a.sets, "override a config key (key=value)");
  cmd->add_option("-l,--languages", a.languages, "comma-separated language codes");
  cmd->add_option("--train", a.train, "training treebank (lang=path)");
  cmd->add_option("--dev", a.dev, "development treebank (lang=path)");
  cmd->add_option("--test", a.test, "test treebank (lang=path)");
  cmd->add_option("--strategy", a.strategy, "sharing strategy, e.g. C=x,W=h,S=id");
  cmd->add_option("--seeds", a.seeds, "comma-separated training seeds");
  cmd->add_option("--epochs", a.epochs, "training epochs");
  cmd->add_option("--sample-size", a.sample_size, "training sentences per language");
  cmd->add_option("-o,--output", a.output, "output directory");
  cmd->add_option("-j,--jobs", a.jobs, "parallel training jobs");
  cmd->add_flag("--synthetic", a.synthetic, "generate synthetic treebanks");
}

std::pair<std::string, std::string> key_value(const std::string& s, const char* what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError(std::string(what) + ": expected key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

ExperimentConfig resolve(const ExperimentArgs& a) {
  ExperimentConfig c;
  if (!a.config.empty()) {
    if (!fs::exists(a.config)) throw ConfigError("config file not found: " + a.config);
    c = load_experiment(a.config);
  }
  for (const std::string& s : a.sets) {
    const auto [k, v] = key_value(s, "--set");
    c.set(k, v);
  }
  if (!a.languages.empty()) c.set("languages", a.languages);
  for (const auto& [kind, list] : {std::pair{"train", &a.train}, {"dev", &a.dev}, {"test", &a.test}})
    for (const std::string& s : *list) {
      const auto [lang, path] = key_value(s, kind);
      c.set(std::string(kind) + "." + lang, path);
    }
  if (!a.strategy.empty()) c.set("strategy", a.strategy);
  if (!a.seeds.empty()) c.set("seeds", a.seeds);
  if (a.epochs) c.set("epochs", std::to_string(a.epochs));
  if (a.sample_size) c.set("sample_size", std::to_string(a.sample_size));
  if (!a.output.empty()) c.set("output", a.output);
  if (a.jobs) c.set("jobs", std::to_string(a.jobs));
  if (a.synthetic) c.set("synthetic", "true");
  if (deterministic_mode()) c.jobs = 1;
  c.training.validate();
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("file not found: " + path);
}

void report_failures(const std::vector<JobResult>& results) {
  for (const JobResult& r : results)
    if (!r.ok)
      std::cerr << "job " << r.job.name << " (seed " << r.job.seed << ") failed: " << r.error << '\n';
}

int cmd_train(const ExperimentArgs& a) {
  ExperimentConfig c = resolve(a);
  if (c.languages.empty() || c.languages.size() > 2)
    throw ConfigError("train needs one or two languages");
  const Corpora corpora = load_corpora(c);
  fs::create_directories(c.output);
  TrainConfig tc = c.training;
  tc.strategy = c.strategy;
  tc.seed = c.seeds.front();
  tc.checkpoint = (fs::path(c.output) / "model.bin").string();
  std::vector<LanguageData> data;
  for (const std::string& l : c.languages)
    data.push_back({l, corpora.splits.at(l).train, corpora.splits.at(l).dev});
  write_manifest((fs::path(c.output) / "manifest.json").string(),
                 manifest("train", c, corpora, {}));
  TrainResult r = train(tc, data, [](const EpochRecord& e) {
    std::cerr << "epoch " << e.epoch << " loss " << e.loss << " dev LAS "
              << format_score(e.mean_dev_las) << '\n';
  });
  write_text(fs::path(c.output) / "report.txt", r.report.serialize());
  std::cout << "strategy " << r.report.strategy << "\nbest epoch " << r.report.best_epoch
            << " dev LAS " << format_score(r.report.best().mean_dev_las) << "\nmodel "
            << tc.checkpoint << '\n';
  return 0;
}

int cmd_parse(const std::string& model_path, const std::string& input,
              const std::string& language, const std::string& output) {
  require_file(model_path);
  require_file(input);
  const ParserModel model = ParserModel::load(model_path);
  const int lang = model.language_id(language);
  ReadOptions opts;
  opts.require_tree = false;
  const auto sentences = read_conllu_file(input, language, opts);
  const auto parsed = parse_all(model, sentences, lang);
  if (output.empty() || output == "-") write_conllu(std::cout, parsed);
  else write_conllu_file(output, parsed);
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& system_path,
             const std::string& baseline_path, std::size_t shuffles) {
  require_file(gold_path);
  require_file(system_path);
  const auto gold = read_conllu_file(gold_path, "");
  const auto system = read_conllu_file(system_path, "");
  const ScoredRun run = score_run(gold, system, "", system_path);
  std::cout << "UAS " << format_score(run.uas()) << "\nLAS " << format_score(run.las())
            << "\ntokens " << run.total_tokens() << '\n';
  if (!baseline_path.empty()) {
    require_file(baseline_path);
    const auto baseline = read_conllu_file(baseline_path, "");
    const ScoredRun base = score_run(gold, baseline, "", baseline_path);
    std::cout << "baseline LAS " << format_score(base.las()) << "\ndelta "
              << format_score(run.las() - base.las()) << "\np "
              << randomization_test(run, base, shuffles) << '\n';
  }
  return 0;
}

int cmd_grid(const ExperimentArgs& a, const std::string& from_csv, bool ascii) {
  if (!from_csv.empty()) {
    require_file(from_csv);
    std::cout << load_grid_csv(from_csv).text(!ascii);
    return 0;
  }
  const ExperimentConfig c = resolve(a);
  const auto jobs = grid_jobs(c);
  const Corpora corpora = load_corpora(c);
  write_manifest((fs::path(c.output) / "manifest.json").string(),
                 manifest("grid", c, corpora, jobs));
  const auto results = run_jobs(jobs, c.jobs, [&](const Job& j) {
    JobResult r = train_job(c, corpora, j);
    std::cerr << "done " << j.name << " seed " << j.seed << '\n';
    return r;
  });
  report_failures(results);
  const GridReport report = grid_from_results(c, results);
  write_text(fs::path(c.output) / "grid.txt", report.text(!ascii));
  write_text(fs::path(c.output) / "grid.csv", report.csv());
  std::cout << report.text(!ascii);
  const bool any = std::any_of(results.begin(), results.end(), [](const JobResult& r) { return r.ok; });
  return any ? 0 : 1;
}

int cmd_ours(const ExperimentArgs& a, bool ascii) {
  const ExperimentConfig c = resolve(a);
  const auto jobs = ours_jobs(c);
  const Corpora corpora = load_corpora(c);
  write_manifest((fs::path(c.output) / "manifest.json").string(),
                 manifest("ours", c, corpora, jobs));
  const auto results = run_jobs(jobs, c.jobs, [&](const Job& j) {
    JobResult r = train_job(c, corpora, j);
    std::cerr << "done " << j.name << " seed " << j.seed << '\n';
    return r;
  });
  report_failures(results);
  const OursResult ours = ours_from_results(c, results);
  write_text(fs::path(c.output) / "ours.txt", ours_text(ours.rows, !ascii));
  write_text(fs::path(c.output) / "ours.csv", ours_csv(ours.rows));
  write_text(fs::path(c.output) / "selection.json", ours.selection.dump(2) + "\n");
  std::cout << ours_text(ours.rows, !ascii);
  return 0;
}

int cmd_stats(const std::vector<std::string>& files, const std::string& synthetic,
              std::size_t size, std::uint64_t seed) {
  std::cout << "treebank\tsentences\ttokens\tnon-projective\n";
  auto row = [](const std::string& name, const std::vector<Sentence>& s) {
    const TreebankStats st = treebank_stats(s);
    std::size_t np = 0;
    for (const Sentence& x : s) np += !is_projective(x.heads());
    std::cout << name << '\t' << st.sentences << '\t' << st.tokens << '\t' << np << '\n';
  };
  for (const std::string& f : files) {
    require_file(f);
    row(f, read_conllu_file(f, ""));
  }
  if (!synthetic.empty()) {
    std::stringstream in(synthetic);
    std::string code;
    while (std::getline(in, code, ','))
      row(code, generate_treebank(synthetic_language(code), size, seed));
  }
  if (files.empty() && synthetic.empty()) throw UsageError("stats: no treebank given");
  return 0;
}

int cmd_oracle_trace(const std::string& input, std::size_t sentence) {
  require_file(input);
  const auto sentences = read_conllu_file(input, "");
  if (sentence > sentences.size())
    throw UsageError("sentence " + std::to_string(sentence) + " out of range (" +
                     std::to_string(sentences.size()) + " sentences)");
  Vocabulary labels(false);
  for (const Sentence& s : sentences)
    for (const Token& t : s.tokens) labels.add(t.label);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentence && i + 1 != sentence) continue;
    const Sentence& s = sentences[i];
    std::cout << "# sentence " << i + 1 << (s.id().empty() ? "" : " " + s.id()) << '\n';
    for (const std::string& line : oracle_trace(gold_tree(s, labels), &labels))
      std::cout << line << '\n';
  }
  return 0;
}

int cmd_synth(const std::string& code, std::size_t size, std::uint64_t seed,
              const std::string& output) {
  const auto tb = generate_treebank(synthetic_language(code), size, seed);
  if (output.empty() || output == "-") write_conllu(std::cout, tb);
  else write_conllu_file(output, tb);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual transition-based dependency parser with parameter sharing"};
  app.require_subcommand(1);

  ExperimentArgs train_args, grid_args, ours_args;
  auto* train_cmd = app.add_subcommand("train", "train one model (1 language: mono baseline)");
  add_experiment_options(train_cmd, train_args);

  std::string model_path, input, language, output;
  auto* parse_cmd = app.add_subcommand("parse", "parse a CoNLL-U file with a trained model");
  parse_cmd->add_option("-m,--model", model_path, "checkpoint")->required();
  parse_cmd->add_option("-i,--input", input, "input CoNLL-U")->required();
  parse_cmd->add_option("-l,--language", language, "language code")->required();
  parse_cmd->add_option("-o,--output", output, "output CoNLL-U (default stdout)");

  std::string gold, system, baseline;
  std::size_t shuffles = 10000;
  auto* eval_cmd = app.add_subcommand("eval", "UAS/LAS and optional significance test");
  eval_cmd->add_option("-g,--gold", gold, "gold CoNLL-U")->required();
  eval_cmd->add_option("-p,--system", system, "predicted CoNLL-U")->required();
  eval_cmd->add_option("-b,--baseline", baseline, "baseline predictions for the paired test");
  eval_cmd->add_option("--shuffles", shuffles, "randomization replicates");

  std::string from_csv;
  bool ascii = false;
  auto* grid_cmd = app.add_subcommand("grid", "train and rank all 27 sharing strategies");
  add_experiment_options(grid_cmd, grid_args);
  grid_cmd->add_option("--from-csv", from_csv, "render a stored grid CSV instead of training");
  grid_cmd->add_flag("--ascii", ascii, "x/h/id instead of display symbols");

  auto* ours_cmd = app.add_subcommand("ours", "select (W, C) on dev with S shared, compare to mono");
  add_experiment_options(ours_cmd, ours_args);
  ours_cmd->add_flag("--ascii", ascii, "x/h/id instead of display symbols");

  std::vector<std::string> stat_files;
  std::string synthetic;
  std::size_t synth_size = 1000;
  std::uint64_t synth_seed = 1;
  auto* stats_cmd = app.add_subcommand("stats", "sentence and token counts");
  stats_cmd->add_option("files", stat_files, "CoNLL-U files");
  stats_cmd->add_option("--synthetic", synthetic, "comma-separated synthetic languages");
  stats_cmd->add_option("--size", synth_size, "synthetic sentences");
  stats_cmd->add_option("--seed", synth_seed, "synthetic seed");

  std::size_t sentence = 0;
  auto* trace_cmd = app.add_subcommand("oracle-trace", "static oracle derivation per sentence");
  trace_cmd->add_option("-i,--input", input, "gold CoNLL-U")->required();
  trace_cmd->add_option("-n,--sentence", sentence, "1-based sentence (default: all)");

  std::string synth_lang;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic treebank");
  synth_cmd->add_option("-l,--language", synth_lang, "a1, a2, b1 or b2")->required();
  synth_cmd->add_option("-n,--sentences", synth_size, "sentences");
  synth_cmd->add_option("--seed", synth_seed, "seed");
  synth_cmd->add_option("-o,--output", output, "output CoNLL-U (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (deterministic_mode()) kernels::set_single_threaded();
  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*parse_cmd) return cmd_parse(model_path, input, language, output);
    if (*eval_cmd) return cmd_eval(gold, system, baseline, shuffles);
    if (*grid_cmd) return cmd_grid(grid_args, from_csv, ascii);
    if (*ours_cmd) return cmd_ours(ours_args, ascii);
    if (*stats_cmd) return cmd_stats(stat_files, synthetic, synth_size, synth_seed);
    if (*trace_cmd) return cmd_oracle_trace(input, sentence);
    if (*synth_cmd) return cmd_synth(synth_lang, synth_size, synth_seed, output);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
