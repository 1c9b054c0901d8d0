// Copyright 2026 The LeakChain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "leakchain/harness/run.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "leakchain/eval/pipeline_eval.hpp"
#include "leakchain/nn/checkpoint.hpp"
#include "leakchain/train/trainer.hpp"

namespace leakchain::harness {

namespace {

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string UtcNow() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool AllZero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double b) { return b == 0.0; });
}

std::vector<ProbeRow> ProbeRows(const eval::PipelineEvaluation& e, int classes) {
  std::vector<ProbeRow> rows;
  for (std::size_t i = 0; i < e.probe_accuracy.size(); ++i) {
    for (std::size_t j = 0; j < e.probe_accuracy[i].size(); ++j) {
      const double acc = e.probe_accuracy[i][j];
      rows.push_back({static_cast<int>(i + 1), static_cast<int>(j + 1), acc,
                      eval::leakage_margin(acc, classes)});
    }
  }
  return rows;
}

}  // namespace

fs::path output_root(const RunConfig& config) {
  if (const char* env = std::getenv("LEAKCHAIN_OUT"); env && *env) return fs::path(env);
  return fs::path(config.output_dir);
}

RunConfig single_run_config(const RunConfig& base, int agents, double beta, Selective selective,
                            std::uint64_t seed) {
  RunConfig c = base;
  const RunConfig defaults;
  c.mode = Mode::kTrain;
  c.agents = agents;
  c.beta = beta;
  if (c.betas && static_cast<int>(c.betas->size()) != agents) c.betas.reset();
  c.selective = selective;
  c.seeds = {seed};
  c.output_dir = defaults.output_dir;
  c.sweep_betas.clear();
  c.sweep_depths.clear();
  c.sweep_selective.clear();
  c.verify_count = defaults.verify_count;
  c.verify_n_min = defaults.verify_n_min;
  c.verify_n_max = defaults.verify_n_max;
  c.verify_max_alphabet = defaults.verify_max_alphabet;
  c.verify_seed = defaults.verify_seed;
  c.validate();
  return c;
}

std::string run_id(const RunConfig& single) {
  return git_blob_hash(serialize_config(single)).substr(0, 12);
}

void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows) {
  os << "observer,target,accuracy,margin\n" << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.observer << ',' << r.target << ',' << r.accuracy << ',' << r.margin << '\n';
  }
}

std::vector<ProbeRow> read_probe_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "observer,target,accuracy,margin") {
    throw std::runtime_error("probe file has an unexpected header");
  }
  std::vector<ProbeRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ProbeRow r;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ss(line);
    if (!(ss >> r.observer >> c1 >> r.target >> c2 >> r.accuracy >> c3 >> r.margin) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw std::runtime_error("malformed probe row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

double depth_leakage(const std::vector<ProbeRow>& rows) {
  std::map<int, double> per_observer;
  for (const auto& r : rows) per_observer[r.observer] += r.margin;
  if (per_observer.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [obs, v] : per_observer) sum += v;
  return sum / static_cast<double>(per_observer.size());
}

double global_leakage(const std::vector<ProbeRow>& rows) {
  int last = 0;
  for (const auto& r : rows) last = std::max(last, r.observer);
  double sum = 0.0;
  for (const auto& r : rows) {
    if (r.observer == last) sum += r.margin;
  }
  return sum;
}

double local_leakage(const std::vector<ProbeRow>& rows) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : rows) {
    if (r.observer == r.target) {
      sum += r.accuracy;
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

RunSummary load_run_summary(const fs::path& dir) {
  RunSummary s;
  s.dir = dir;
  s.config = parse_config(ReadFile(dir / "config_snapshot.yaml"));
  s.run_id = run_id(s.config);
  std::istringstream metrics(ReadFile(dir / "metrics.csv"));
  const auto records = eval::read_metrics_csv(metrics);
  if (records.size() != 1) throw std::runtime_error(dir.string() + "/metrics.csv must hold one row");
  s.metrics = records.front();
  if (fs::exists(dir / "probe.csv")) {
    std::istringstream probes(ReadFile(dir / "probe.csv"));
    s.probes = read_probe_csv(probes);
  }
  return s;
}

std::string arm_of(const RunConfig& single) {
  if (AllZero(single.effective_betas())) return "baseline";
  return single.selective == Selective::kEarly ? "early" : "regularized";
}

RunSummary execute_run(const RunConfig& single, const fs::path& root,
                       std::optional<double> paired_baseline, bool reuse) {
  single.validate();
  if (single.seeds.size() != 1) throw std::invalid_argument("a single run takes exactly one seed");
  const std::uint64_t seed = single.seeds.front();
  const std::string snapshot = serialize_config(single);
  const std::string id = run_id(single);
  const fs::path dir = root / "runs" / id;

  if (reuse && fs::exists(dir / "metrics.csv") && fs::exists(dir / "probe.csv") &&
      fs::exists(dir / "config_snapshot.yaml") &&
      ReadFile(dir / "config_snapshot.yaml") == snapshot) {
    RunSummary s = load_run_summary(dir);
    s.reused = true;
    return s;
  }

  const bool unpenalized = AllZero(single.effective_betas());
  if (!paired_baseline && single.mi_baseline) paired_baseline = single.mi_baseline;
  if (!paired_baseline && !unpenalized) {
    RunConfig base = single;
    base.betas.reset();
    base.beta = 0.0;
    base.selective = Selective::kAll;
    paired_baseline = execute_run(base, root, std::nullopt, reuse).metrics.mi_avg;
  }

  const std::string started = UtcNow();
  fs::create_directories(dir / "checkpoints");
  WriteFile(dir / "config_snapshot.yaml", snapshot);

  const train::SyntheticTask task(single.task_spec(seed));
  const train::TrainConfig tc = single.train_config(seed);
  const auto result = train::run_training(task, tc);

  std::ostringstream trace, mi;
  train::write_train_trace_csv(trace, result.trace, single.agents);
  train::write_mi_trace_csv(mi, result.trace);
  WriteFile(dir / "train_trace.csv", trace.str());
  WriteFile(dir / "mi_trace.csv", mi.str());
  std::vector<std::string> artifacts{"config_snapshot.yaml", "train_trace.csv", "mi_trace.csv"};
  if (!result.trace.eval.empty()) {
    std::ostringstream ev;
    ev << "iter,test_ce_nats,test_accuracy\n" << std::setprecision(12);
    for (const auto& r : result.trace.eval) {
      ev << r.iter << ',' << r.test_ce << ',' << r.test_accuracy << '\n';
    }
    WriteFile(dir / "eval_trace.csv", ev.str());
    artifacts.push_back("eval_trace.csv");
  }

  {
    std::ostringstream ck;
    train::save_pipeline(ck, result.state.model);
    WriteFile(dir / "checkpoints" / "pipeline.txt", ck.str());
    artifacts.push_back("checkpoints/pipeline.txt");
    for (std::size_t i = 0; i < result.state.critics.size(); ++i) {
      std::ostringstream cc;
      nn::save_mlp(cc, result.state.critics[i].net());
      const std::string name = "checkpoints/critic_" + std::to_string(i + 1) + ".txt";
      WriteFile(dir / name, cc.str());
      artifacts.push_back(name);
    }
  }

  const auto e =
      eval::evaluate_pipeline(result.state.model, result.state.critics, task, single.eval_config(seed));
  RunSummary s;
  s.run_id = id;
  s.dir = dir;
  s.config = single;
  s.probes = ProbeRows(e, single.sensitive_classes);
  auto& m = s.metrics;
  m.run_id = id;
  m.agents = single.agents;
  m.beta = single.nominal_beta();
  m.seed = seed;
  m.ce = e.ce;
  m.core = eval::core_metrics(e.predictions, task.split(train::Split::kTest).labels, e.la);
  m.mi_avg = e.mi_avg;
  m.ot = e.ot;
  eval::finalize_record(m, unpenalized && !paired_baseline ? std::optional<double>(e.mi_avg)
                                                           : paired_baseline);

  std::ostringstream probes, metrics;
  write_probe_csv(probes, s.probes);
  eval::write_metrics_csv(metrics, {m});
  WriteFile(dir / "probe.csv", probes.str());
  WriteFile(dir / "metrics.csv", metrics.str());
  artifacts.push_back("probe.csv");
  artifacts.push_back("metrics.csv");

  nlohmann::json record = {
      {"run_id", id},
      {"config_hash", git_blob_hash(snapshot)},
      {"seed", seed},
      {"started_at", started},
      {"finished_at", UtcNow()},
      {"artifacts", artifacts},
      {"config_snapshot", snapshot},
  };
  WriteFile(dir / "run_record.json", record.dump(2) + "\n");
  // Hand back what a later reuse would see, so paired values do not depend
  // on whether the baseline was trained in this process.
  return load_run_summary(dir);
}

RunSummary reprobe_run(const fs::path& dir) {
  RunSummary s = load_run_summary(dir);
  const std::uint64_t seed = s.config.seeds.front();
  const train::SyntheticTask task(s.config.task_spec(seed));
  std::istringstream ck(ReadFile(dir / "checkpoints" / "pipeline.txt"));
  const train::PipelineModel model = train::load_pipeline(ck);
  const auto e = eval::evaluate_pipeline(model, {}, task, s.config.eval_config(seed));
  s.probes = ProbeRows(e, s.config.sensitive_classes);
  std::ostringstream probes;
  write_probe_csv(probes, s.probes);
  WriteFile(dir / "probe.csv", probes.str());
  return s;
}

}  // namespace leakchain::harness
