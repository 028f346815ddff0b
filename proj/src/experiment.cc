#include "biparse/experiment.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "biparse/common.h"
#include "biparse/kernels.h"
#include "biparse/synthetic.h"

namespace biparse {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return out;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  const auto dot = key.find('.');
  const std::string head = key.substr(0, dot);
  const std::string tail = dot == std::string::npos ? "" : key.substr(dot + 1);
  if (key == "languages") {
    languages = split_list(v);
  } else if (dot != std::string::npos && (head == "train" || head == "dev" || head == "test")) {
    if (tail.empty()) throw ConfigError(key + ": missing language code");
    (head == "train" ? train_paths : head == "dev" ? dev_paths : test_paths)[tail] = v;
  } else if (key == "synthetic") {
    synthetic = to_bool(key, v);
  } else if (key == "synthetic.train") {
    synthetic_train = to_u64(key, v);
  } else if (key == "synthetic.dev") {
    synthetic_dev = to_u64(key, v);
  } else if (key == "synthetic.test") {
    synthetic_test = to_u64(key, v);
  } else if (key == "synthetic.seed") {
    synthetic_seed = to_u64(key, v);
  } else if (key == "strategy") {
    strategy = SharingStrategy::parse(v);
  } else if (key == "target") {
    target = v;
  } else if (key == "seed" || key == "seeds") {
    seeds.clear();
    for (const std::string& s : split_list(v)) seeds.push_back(to_u64(key, s));
    if (seeds.empty()) throw ConfigError(key + ": no seeds given");
  } else if (key == "sample_size") {
    training.sample_size = to_u64(key, v);
  } else if (key == "epochs") {
    training.epochs = to_u64(key, v);
  } else if (key == "word_dropout") {
    training.word_dropout = to_double(key, v);
  } else if (key == "explore") {
    training.explore = to_bool(key, v);
  } else if (key == "explore_from_epoch") {
    training.explore_from_epoch = to_u64(key, v);
  } else if (key == "explore_probability") {
    training.explore_probability = to_double(key, v);
  } else if (key == "margin") {
    training.margin = to_double(key, v);
  } else if (key == "stop_at_las") {
    training.stop_at_las = to_double(key, v);
  } else if (key == "optimizer") {
    if (v == "adam") training.optimizer.kind = OptimizerConfig::Kind::Adam;
    else if (v == "sgd") training.optimizer.kind = OptimizerConfig::Kind::Sgd;
    else throw ConfigError("optimizer: expected adam or sgd, got '" + v + "'");
  } else if (key == "learning_rate") {
    training.optimizer.learning_rate = to_double(key, v);
  } else if (head == "dims" && dot != std::string::npos) {
    nlohmann::json j = training.dims.to_json();
    if (!j.contains(tail)) throw ConfigError("unknown key '" + key + "'");
    if (tail == "interpolation") j[tail] = to_double(key, v);
    else j[tail] = to_u64(key, v);
    training.dims = ModelDims::from_json(j);
  } else if (key == "output") {
    output = v;
  } else if (key == "jobs") {
    jobs = to_u64(key, v);
    if (jobs == 0) throw ConfigError("jobs must be at least 1");
  } else if (key == "shuffles") {
    shuffles = to_u64(key, v);
  } else if (key == "save_models") {
    save_models = to_bool(key, v);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

std::map<std::string, std::string> ExperimentConfig::resolved() const {
  std::map<std::string, std::string> r;
  r["languages"] = join(languages);
  for (const auto& [l, p] : train_paths) r["train." + l] = p;
  for (const auto& [l, p] : dev_paths) r["dev." + l] = p;
  for (const auto& [l, p] : test_paths) r["test." + l] = p;
  r["synthetic"] = synthetic ? "true" : "false";
  if (synthetic) {
    r["synthetic.train"] = std::to_string(synthetic_train);
    r["synthetic.dev"] = std::to_string(synthetic_dev);
    r["synthetic.test"] = std::to_string(synthetic_test);
    r["synthetic.seed"] = std::to_string(synthetic_seed);
  }
  r["strategy"] = strategy.str();
  r["target"] = target;
  std::vector<std::string> s;
  for (std::uint64_t x : seeds) s.push_back(std::to_string(x));
  r["seeds"] = join(s);
  r["sample_size"] = std::to_string(training.sample_size);
  r["epochs"] = std::to_string(training.epochs);
  r["word_dropout"] = num(training.word_dropout);
  r["explore"] = training.explore ? "true" : "false";
  r["explore_from_epoch"] = std::to_string(training.explore_from_epoch);
  r["explore_probability"] = num(training.explore_probability);
  r["margin"] = num(training.margin);
  r["stop_at_las"] = num(training.stop_at_las);
  r["optimizer"] = training.optimizer.kind == OptimizerConfig::Kind::Adam ? "adam" : "sgd";
  r["learning_rate"] = num(training.optimizer.learning_rate);
  const nlohmann::json dims = training.dims.to_json();
  for (const auto& [k, v] : dims.items())
    r["dims." + k] = v.is_number_float() ? num(v.get<double>()) : v.dump();
  r["output"] = output;
  r["jobs"] = std::to_string(jobs);
  r["shuffles"] = std::to_string(shuffles);
  r["save_models"] = save_models ? "true" : "false";
  return r;
}

std::string ExperimentConfig::text() const {
  std::string out;
  for (const auto& [k, v] : resolved()) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::string> ExperimentConfig::targets() const {
  if (target == "all") return languages;
  if (target.empty()) {
    if (languages.empty()) return {};
    return {languages.front()};
  }
  if (std::find(languages.begin(), languages.end(), target) == languages.end())
    throw ConfigError("target '" + target + "' is not one of the languages");
  return {target};
}

ExperimentConfig parse_experiment(const std::string& text) {
  ExperimentConfig c;
  std::stringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    c.set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  return parse_experiment(read_file(path));
}

Corpora load_corpora(const ExperimentConfig& config, bool need_test) {
  if (config.languages.empty()) throw ConfigError("no languages configured");
  Corpora c;
  for (const std::string& lang : config.languages) {
    Split& s = c.splits[lang];
    if (config.synthetic) {
      const SyntheticLanguage sl = synthetic_language(lang);
      const std::uint64_t seed = fnv1a(lang, config.synthetic_seed);
      auto all = generate_treebank(
          sl, config.synthetic_train + config.synthetic_dev + config.synthetic_test, seed);
      s.train.assign(all.begin(), all.begin() + config.synthetic_train);
      s.dev.assign(all.begin() + config.synthetic_train,
                   all.begin() + config.synthetic_train + config.synthetic_dev);
      s.test.assign(all.begin() + config.synthetic_train + config.synthetic_dev, all.end());
      c.input_hashes["synthetic:" + lang] = hex64(fnv1a(to_conllu(all)));
      continue;
    }
    auto load = [&](const std::map<std::string, std::string>& paths, const char* kind,
                    bool required) -> std::vector<Sentence> {
      const auto it = paths.find(lang);
      if (it == paths.end()) {
        if (required) throw ConfigError(std::string("no ") + kind + " file for " + lang);
        return {};
      }
      if (!std::filesystem::exists(it->second))
        throw ConfigError(std::string(kind) + " file not found: " + it->second);
      const std::string text = read_file(it->second);
      c.input_hashes[it->second] = hex64(fnv1a(text));
      return parse_conllu(text, lang);
    };
    s.train = load(config.train_paths, "train", true);
    s.dev = load(config.dev_paths, "dev", true);
    s.test = load(config.test_paths, "test", need_test);
  }
  return c;
}

std::vector<Job> grid_jobs(const ExperimentConfig& config) {
  if (config.languages.size() != 2) throw ConfigError("grid needs exactly 2 languages");
  std::vector<Job> jobs;
  for (std::uint64_t seed : config.seeds) {
    for (const SharingStrategy& s : all_strategies())
      jobs.push_back({s.str(), config.languages, s, seed});
    for (const std::string& l : config.languages)
      jobs.push_back({"mono:" + l, {l}, SharingStrategy{}, seed});
  }
  return jobs;
}

std::vector<Job> ours_jobs(const ExperimentConfig& config) {
  if (config.languages.size() != 2) throw ConfigError("ours needs exactly 2 languages");
  std::vector<Job> jobs;
  for (std::uint64_t seed : config.seeds) {
    for (Mode w : kModes)
      for (Mode c : kModes) {
        const SharingStrategy s{c, w, Mode::Hard};
        jobs.push_back({s.str(), config.languages, s, seed});
      }
    for (const std::string& l : config.targets())
      jobs.push_back({"mono:" + l, {l}, SharingStrategy{}, seed});
  }
  return jobs;
}

std::vector<JobResult> run_jobs(const std::vector<Job>& jobs, std::size_t threads,
                                const std::function<JobResult(const Job&)>& fn) {
  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    kernels::set_single_threaded();
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = fn(jobs[i]);
      } catch (const std::exception& e) {
        results[i].ok = false;
        results[i].error = e.what();
      }
      results[i].job = jobs[i];
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return results;
}

JobResult train_job(const ExperimentConfig& config, const Corpora& corpora,
                    const Job& job) {
  TrainConfig tc = config.training;
  tc.strategy = job.strategy;
  tc.seed = job.seed;
  if (config.save_models) {
    const std::filesystem::path dir = std::filesystem::path(config.output) /
                                      safe_name(job.name) /
                                      ("seed" + std::to_string(job.seed));
    std::filesystem::create_directories(dir);
    tc.checkpoint = (dir / "model.bin").string();
  }
  std::vector<LanguageData> data;
  for (const std::string& l : job.languages) {
    const Split& s = corpora.splits.at(l);
    data.push_back({l, s.train, s.dev});
  }
  TrainResult trained = train(tc, data);
  JobResult r;
  r.job = job;
  r.ok = true;
  r.report = trained.report;
  for (std::size_t k = 0; k < job.languages.size(); ++k) {
    const std::string& l = job.languages[k];
    const Split& s = corpora.splits.at(l);
    const int lang = static_cast<int>(k);
    r.dev[l] = score_run(s.dev, parse_all(trained.model, s.dev, lang), l, job.name);
    if (!s.test.empty())
      r.test[l] = score_run(s.test, parse_all(trained.model, s.test, lang), l, job.name);
  }
  if (config.save_models) {
    std::ofstream out(std::filesystem::path(tc.checkpoint).parent_path() / "report.txt");
    out << r.report.serialize();
  }
  return r;
}

nlohmann::json manifest(const std::string& command, const ExperimentConfig& config,
                        const Corpora& corpora, const std::vector<Job>& jobs) {
  nlohmann::json m;
  m["command"] = command;
  m["config"] = config.resolved();
  m["inputs"] = corpora.input_hashes;
#ifdef BIPARSE_SINGLE_PRECISION
  m["precision"] = 32;
#else
  m["precision"] = 64;
#endif
  nlohmann::json js = nlohmann::json::array();
  for (const Job& j : jobs)
    js.push_back({{"name", j.name}, {"languages", j.languages}, {"seed", j.seed}});
  m["jobs"] = js;
  return m;
}

void write_manifest(const std::string& path, const nlohmann::json& m) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << m.dump(2) << '\n';
}

namespace {

// Mean dev LAS of `name` for `lang` over seeds; empty if any seed is missing.
std::optional<double> mean_las(const ExperimentConfig& config,
                               const std::vector<JobResult>& results,
                               const std::string& name, const std::string& lang,
                               bool test = false) {
  double sum = 0;
  std::size_t n = 0;
  for (const JobResult& r : results) {
    if (r.job.name != name) continue;
    const auto& runs = test ? r.test : r.dev;
    if (!r.ok || !runs.count(lang)) return std::nullopt;
    sum += runs.at(lang).las();
    ++n;
  }
  if (n != config.seeds.size()) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

GridReport grid_from_results(const ExperimentConfig& config,
                             const std::vector<JobResult>& results) {
  std::vector<GridRow> rows;
  for (const SharingStrategy& s : all_strategies()) {
    GridRow row;
    row.strategy = s;
    for (const std::string& l : config.languages)
      row.las.push_back(mean_las(config, results, s.str(), l));
    rows.push_back(row);
  }
  GridRow mono;
  mono.name = "Mono";
  for (const std::string& l : config.languages)
    mono.las.push_back(mean_las(config, results, "mono:" + l, l));
  return grid_report(config.languages, std::move(rows), std::move(mono));
}

OursResult ours_from_results(const ExperimentConfig& config,
                             const std::vector<JobResult>& results) {
  OursResult out;
  for (const std::string& target : config.targets()) {
    SelectionGrid grid;
    nlohmann::json cells = nlohmann::json::object();
    for (Mode w : kModes)
      for (Mode c : kModes) {
        const SharingStrategy s{c, w, Mode::Hard};
        const auto las = mean_las(config, results, s.str(), target);
        if (!las) throw Error("cell " + s.str() + " failed for " + target);
        grid[{w, c}] = *las;
        cells[s.str()] = *las;
      }
    const auto [w, c] = select_strategy(grid);
    const SharingStrategy chosen{c, w, Mode::Hard};

    // Test split when present, otherwise dev; runs of all seeds are pooled
    // sentence by sentence for the significance test.
    const bool use_test = !results.empty() &&
                          std::any_of(results.begin(), results.end(), [&](const JobResult& r) {
                            return r.test.count(target) > 0;
                          });
    ScoredRun ours_run, mono_run;
    auto pool = [&](ScoredRun& into, const std::string& name) {
      for (const JobResult& r : results) {
        if (r.job.name != name) continue;
        if (!r.ok) throw Error("job " + name + " failed: " + r.error);
        const ScoredRun& s = (use_test ? r.test : r.dev).at(target);
        into.correct_heads.insert(into.correct_heads.end(), s.correct_heads.begin(), s.correct_heads.end());
        into.correct_labeled.insert(into.correct_labeled.end(), s.correct_labeled.begin(), s.correct_labeled.end());
        into.tokens.insert(into.tokens.end(), s.tokens.begin(), s.tokens.end());
      }
    };
    pool(ours_run, chosen.str());
    pool(mono_run, "mono:" + target);
    const auto ours_las = mean_las(config, results, chosen.str(), target, use_test);
    const auto mono_las = mean_las(config, results, "mono:" + target, target, use_test);
    if (!ours_las || !mono_las) throw Error("incomplete results for " + target);

    OursRow row;
    row.language = target;
    row.words = w;
    row.chars = c;
    row.ours = *ours_las;
    row.mono = *mono_las;
    row.p_value = randomization_test(ours_run, mono_run, config.shuffles);
    out.rows.push_back(row);
    out.selection[target] = {{"dev_grid", cells},
                             {"selected", chosen.str()},
                             {"evaluated_on", use_test ? "test" : "dev"},
                             {"ours", row.ours},
                             {"mono", row.mono},
                             {"delta", row.delta()},
                             {"p_value", row.p_value}};
  }
  return out;
}

bool deterministic_mode() {
  const char* v = std::getenv("BIPARSE_DETERMINISTIC");
  if (!v) return false;
  const std::string s(v);
  return !(s.empty() || s == "0" || s == "false");
}

}  // namespace biparse
