#ifndef BIPARSE_EXPERIMENT_H_
#define BIPARSE_EXPERIMENT_H_

// Experiment orchestration: flat key=value configs, job enumeration for the
// strategy grid and the "Ours" sweep, a parallel job runner and run manifests.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "biparse/evaluation.h"
#include "biparse/sharing.h"
#include "biparse/training.h"

namespace biparse {

// One line per key ("key = value"); '#' starts a comment line. Keys:
//   languages          comma-separated codes (1 or 2)
//   train.<lang>, dev.<lang>, test.<lang>   CoNLL-U paths
//   synthetic          true: generate treebanks for synthetic languages
//   synthetic.train, synthetic.dev, synthetic.test, synthetic.seed
//   strategy           e.g. C=x,W=h,S=id
//   target             language scored by "ours" (default: first; "all")
//   seeds              comma-separated training seeds
//   sample_size epochs word_dropout explore explore_from_epoch
//   explore_probability margin stop_at_las optimizer learning_rate
//   dims.<field>       any ModelDims field
//   output jobs shuffles save_models
struct ExperimentConfig {
  std::vector<std::string> languages;
  std::map<std::string, std::string> train_paths, dev_paths, test_paths;
  bool synthetic = false;
  std::size_t synthetic_train = 500;
  std::size_t synthetic_dev = 200;
  std::size_t synthetic_test = 200;
  std::uint64_t synthetic_seed = 1;
  SharingStrategy strategy;
  std::string target;
  std::vector<std::uint64_t> seeds{1};
  TrainConfig training;
  std::string output = "run";
  std::size_t jobs = 1;
  std::size_t shuffles = 10000;
  bool save_models = true;

  // Throws ConfigError on unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  // Resolved configuration, one entry per key.
  std::map<std::string, std::string> resolved() const;
  std::string text() const;
  std::vector<std::string> targets() const;
};

ExperimentConfig parse_experiment(const std::string& text);
ExperimentConfig load_experiment(const std::string& path);

struct Split {
  std::vector<Sentence> train, dev, test;
};

struct Corpora {
  std::map<std::string, Split> splits;
  std::map<std::string, std::string> input_hashes;  // path -> FNV-1a hex
};

// Missing files raise ConfigError naming the path.
Corpora load_corpora(const ExperimentConfig& config, bool need_test = false);

struct Job {
  std::string name;  // strategy string or "mono:<lang>"
  std::vector<std::string> languages;
  SharingStrategy strategy;
  std::uint64_t seed = 1;
  bool mono() const { return languages.size() == 1; }
};

// Per seed: the 27 strategies, then one mono baseline per language.
std::vector<Job> grid_jobs(const ExperimentConfig& config);
// Per seed: the 9 (W, C) cells with S = Hard, then a mono baseline for each
// target language.
std::vector<Job> ours_jobs(const ExperimentConfig& config);

struct JobResult {
  Job job;
  bool ok = false;
  std::string error;
  TrainReport report;
  std::map<std::string, ScoredRun> dev;   // by language
  std::map<std::string, ScoredRun> test;  // when test data exists
};

// Runs fn over jobs on up to `threads` workers, each restricted to one
// OpenMP thread. Results keep the job order; exceptions become failed cells.
std::vector<JobResult> run_jobs(
    const std::vector<Job>& jobs, std::size_t threads,
    const std::function<JobResult(const Job&)>& fn);

// Trains one job and scores it on dev (and test when present).
JobResult train_job(const ExperimentConfig& config, const Corpora& corpora,
                    const Job& job);

nlohmann::json manifest(const std::string& command,
                        const ExperimentConfig& config, const Corpora& corpora,
                        const std::vector<Job>& jobs);
void write_manifest(const std::string& path, const nlohmann::json& m);

// Dev LAS averaged over seeds; missing when any seed failed.
GridReport grid_from_results(const ExperimentConfig& config,
                             const std::vector<JobResult>& results);

struct OursResult {
  std::vector<OursRow> rows;
  nlohmann::json selection;  // per target: dev grid and chosen cell
};

OursResult ours_from_results(const ExperimentConfig& config,
                             const std::vector<JobResult>& results);

// Deterministic mode (single-threaded kernels, one job at a time) from the
// BIPARSE_DETERMINISTIC environment variable.
bool deterministic_mode();

}  // namespace biparse

#endif  // BIPARSE_EXPERIMENT_H_
