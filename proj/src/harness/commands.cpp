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

#include "leakchain/harness/commands.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "leakchain/exact/pipeline.hpp"
#include "leakchain/train/task.hpp"

namespace leakchain::harness {

namespace {

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(12);
  return out;
}

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

// Runs fn(0..n-1) on up to `jobs` threads.
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// ---- verify-bound helpers ----

struct CheckRow {
  int agents = 0;
  int index = 0;
  std::uint64_t seed = 0;
  std::string structure;
  double leak = 0;
  std::string status;  // pass, violation, capacity
  double global = 0, bound = 0, ratio = 0, min_slack = 0, identity = 0, chain = 0;
  std::string detail;
};

double MaxIdentityResidual(const exact::BoundReport& r) {
  double worst = std::abs(r.global - r.chain_rule_sum);
  for (const auto& s : r.stages) worst = std::max(worst, std::abs(s.identity_residual));
  return worst;
}

double MinSlack(const exact::BoundReport& r) {
  double slack = r.bound - r.global;
  for (const auto& s : r.stages) slack = std::min(slack, s.min_slack());
  return slack;
}

// ---- report helpers ----

std::vector<double> FieldValues(const RunSummary& s) {
  const auto& m = s.metrics;
  return {m.ce,  m.core.bs, m.core.la, m.core.sb, m.core.bo, m.core.os, m.mi_avg,
          m.pi,  m.ot,      m.rc,      m.rt,      m.pari,    depth_leakage(s.probes),
          global_leakage(s.probes)};
}

void WriteAggregateColumns(std::ostream& os, const AggregateRow& row,
                           const std::vector<std::string>& fields) {
  for (const auto& f : fields) {
    const auto it = std::find(std::begin(kAggregateFields), std::end(kAggregateFields), f);
    const auto k = static_cast<std::size_t>(it - std::begin(kAggregateFields));
    os << ',' << Num(row.mean[k]) << ',' << Num(row.stddev[k]);
  }
  os << '\n';
}

void WriteAggregateHeader(std::ostream& os, const std::string& prefix,
                          const std::vector<std::string>& fields) {
  os << prefix;
  for (const auto& f : fields) os << ',' << f << "_mean," << f << "_std";
  os << '\n';
}

std::string CsvField(std::string text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------- verify

int cmd_verify_bound(const VerifyOptions& o, const fs::path& out_dir, std::ostream& log,
                     std::vector<VerifySummaryRow>* summary_out) {
  if (o.count < 0 || o.n_min < 1 || o.n_max < o.n_min || o.max_alphabet < 2) {
    throw std::invalid_argument("verify-bound needs count >= 0, 1 <= n-min <= n-max, alphabet >= 2");
  }
  fs::create_directories(out_dir);
  std::vector<CheckRow> rows;
  std::vector<VerifySummaryRow> summary;
  bool violated = false;

  for (int n = o.n_min; n <= o.n_max; ++n) {
    VerifySummaryRow sum;
    sum.agents = n;
    sum.min_slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < o.count; ++k) {
      const std::uint64_t seed =
          train::stream_seed(o.seed, static_cast<std::uint64_t>(n) * 1'000'000 + k);
      std::mt19937_64 rng(seed);
      const double leak = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const bool copy = k % 4 == 3;
      CheckRow row;
      row.agents = n;
      row.index = k;
      row.seed = seed;
      row.structure = copy ? "copy" : "random";
      row.leak = leak;
      row.status = "pass";
      ++sum.checked;
      try {
        const auto spec = exact::random_pipeline(
            seed, exact::random_shape(seed, static_cast<std::size_t>(n), o.max_alphabet), leak,
            copy ? exact::MapStructure::kCopy : exact::MapStructure::kRandom);
        const auto report = exact::verify_bound_chain(spec);
        row.global = report.global;
        row.bound = report.bound;
        row.ratio = report.ratio();
        row.min_slack = MinSlack(report);
        row.identity = MaxIdentityResidual(report);
        row.chain = report.chain_rule_sum;
        if (!report.pass || row.min_slack < -exact::kInfoFloor || row.identity > exact::kInfoFloor) {
          row.status = "violation";
        }
      } catch (const exact::VerificationFailure& e) {
        row.status = "violation";
        row.min_slack = e.slack();
        row.detail = std::string(e.what()) + " at stage " + std::to_string(e.stage());
      } catch (const exact::CapacityError& e) {
        row.status = "capacity";
        row.detail = e.what();
      }
      if (row.status == "pass") {
        ++sum.passed;
        sum.max_ratio = std::max(sum.max_ratio, row.ratio);
        sum.min_slack = std::min(sum.min_slack, row.min_slack);
        sum.max_identity_residual = std::max(sum.max_identity_residual, row.identity);
      } else if (row.status == "violation") {
        ++sum.violations;
        violated = true;
      } else {
        ++sum.capacity_skipped;
      }
      rows.push_back(std::move(row));
    }
    if (sum.passed == 0) sum.min_slack = 0.0;
    summary.push_back(sum);
  }

  {
    auto out = OpenOut(out_dir / "bound_checks.csv");
    out << "N,index,pipeline_seed,structure,leak,status,global_nats,bound_nats,ratio,min_slack,"
           "identity_residual,chain_rule_sum_nats,detail\n";
    for (const auto& r : rows) {
      out << r.agents << ',' << r.index << ',' << r.seed << ',' << r.structure << ',' << r.leak
          << ',' << r.status << ',' << r.global << ',' << r.bound << ',' << r.ratio << ','
          << r.min_slack << ',' << r.identity << ',' << r.chain << ',' << CsvField(r.detail)
          << '\n';
    }
  }
  {
    auto out = OpenOut(out_dir / "bound_summary.csv");
    out << "N,checked,passed,violations,capacity_skipped,max_ratio,min_slack,"
           "max_identity_residual\n";
    for (const auto& s : summary) {
      out << s.agents << ',' << s.checked << ',' << s.passed << ',' << s.violations << ','
          << s.capacity_skipped << ',' << s.max_ratio << ',' << s.min_slack << ','
          << s.max_identity_residual << '\n';
    }
  }

  const auto xor_report = exact::verify_bound_chain(exact::xor_pipeline());
  {
    auto out = OpenOut(out_dir / "xor_witness.csv");
    exact::write_bound_csv(out, xor_report);
  }

  log << std::fixed << std::setprecision(4);
  for (const auto& s : summary) {
    log << "N=" << s.agents << ": " << s.passed << "/" << s.checked << " pass, " << s.violations
        << " violations, " << s.capacity_skipped << " over capacity, max global/bound "
        << s.max_ratio << '\n';
  }
  double max_ratio = 0.0;
  for (const auto& s : summary) max_ratio = std::max(max_ratio, s.max_ratio);
  log << "max global/bound ratio " << max_ratio << '\n';
  log << "XOR witness: local (";
  const auto eps = xor_report.epsilons();
  for (std::size_t i = 0; i < eps.size(); ++i) log << (i ? ", " : "") << eps[i];
  log << ") global " << xor_report.global << " bound " << xor_report.bound << " nats\n";
  log << (violated ? "FAIL" : "PASS") << '\n';
  log.unsetf(std::ios::floatfield);
  log << std::setprecision(6);

  if (summary_out) *summary_out = summary;
  return violated ? 1 : 0;
}

// ---------------------------------------------------------------- report

double AggregateRow::mean_of(const std::string& field) const {
  const auto it = std::find(std::begin(kAggregateFields), std::end(kAggregateFields), field);
  if (it == std::end(kAggregateFields)) throw std::invalid_argument("unknown field " + field);
  return mean[static_cast<std::size_t>(it - std::begin(kAggregateFields))];
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

Report build_report(std::vector<RunSummary> runs) {
  if (runs.empty()) throw std::invalid_argument("report: no runs to aggregate");
  Report report;
  std::sort(runs.begin(), runs.end(), [](const RunSummary& a, const RunSummary& b) {
    return a.run_id < b.run_id;
  });

  using Key = std::tuple<std::string, int, double>;
  std::map<Key, std::vector<std::vector<double>>> groups;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_arm;
  for (const auto& r : runs) {
    const std::string arm = arm_of(r.config);
    groups[{arm, r.metrics.agents, r.metrics.beta}].push_back(FieldValues(r));
    for (const auto& key : {arm, std::string("all")}) {
      by_arm[key].first.push_back(r.metrics.mi_avg);
      by_arm[key].second.push_back(r.metrics.core.sb);
    }
  }
  for (const auto& [key, values] : groups) {
    AggregateRow row;
    std::tie(row.arm, row.agents, row.beta) = key;
    row.runs = static_cast<int>(values.size());
    row.mean.assign(kAggregateFieldCount, 0.0);
    row.stddev.assign(kAggregateFieldCount, 0.0);
    for (const auto& v : values) {
      for (std::size_t k = 0; k < kAggregateFieldCount; ++k) row.mean[k] += v[k] / row.runs;
    }
    if (row.runs > 1) {
      for (std::size_t k = 0; k < kAggregateFieldCount; ++k) {
        double ss = 0.0;
        for (const auto& v : values) ss += (v[k] - row.mean[k]) * (v[k] - row.mean[k]);
        row.stddev[k] = std::sqrt(ss / (row.runs - 1));
      }
    }
    report.summary.push_back(std::move(row));
  }
  for (const auto& [arm, xy] : by_arm) {
    report.correlation.push_back(
        {arm, static_cast<int>(xy.first.size()), pearson(xy.first, xy.second)});
  }
  report.runs = std::move(runs);
  return report;
}

Report build_report(const std::vector<fs::path>& run_dirs) {
  std::vector<RunSummary> runs;
  std::vector<std::pair<std::string, std::string>> errors;
  for (const auto& dir : run_dirs) {
    try {
      runs.push_back(load_run_summary(dir));
    } catch (const std::exception& e) {
      errors.emplace_back(dir.string(), e.what());
    }
  }
  if (runs.empty()) {
    std::string msg = "report: no readable run directories";
    if (!errors.empty()) msg += " (" + errors.front().first + ": " + errors.front().second + ")";
    throw std::invalid_argument(msg);
  }
  Report report = build_report(std::move(runs));
  report.errors = std::move(errors);
  return report;
}

void write_report(const Report& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::vector<std::string> all(std::begin(kAggregateFields), std::end(kAggregateFields));
  {
    auto out = OpenOut(out_dir / "summary.csv");
    WriteAggregateHeader(out, "arm,N,beta,runs", all);
    for (const auto& r : report.summary) {
      out << r.arm << ',' << r.agents << ',' << Num(r.beta) << ',' << r.runs;
      WriteAggregateColumns(out, r, all);
    }
  }
  {
    auto out = OpenOut(out_dir / "correlation.csv");
    out << "arm,runs,pearson_mi_avg_sb\n";
    for (const auto& c : report.correlation) {
      out << c.arm << ',' << c.runs << ',' << Num(c.pearson) << '\n';
    }
  }
  {
    const std::vector<std::string> fields{"mi_avg_nats", "depth_leakage", "global_leakage", "la"};
    auto rows = report.summary;
    std::stable_sort(rows.begin(), rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
      return std::tie(a.arm, a.beta, a.agents) < std::tie(b.arm, b.beta, b.agents);
    });
    auto out = OpenOut(out_dir / "mi_vs_depth.csv");
    WriteAggregateHeader(out, "arm,beta,N,runs", fields);
    for (const auto& r : rows) {
      out << r.arm << ',' << Num(r.beta) << ',' << r.agents << ',' << r.runs;
      WriteAggregateColumns(out, r, fields);
    }
  }
  {
    auto out = OpenOut(out_dir / "sb_vs_mi.csv");
    out << "run_id,arm,N,beta,seed,mi_avg_nats,sb\n";
    for (const auto& r : report.runs) {
      out << r.run_id << ',' << arm_of(r.config) << ',' << r.metrics.agents << ','
          << Num(r.metrics.beta) << ',' << r.metrics.seed << ',' << Num(r.metrics.mi_avg) << ','
          << Num(r.metrics.core.sb) << '\n';
    }
  }
  {
    const std::vector<std::string> fields{"bs", "la", "sb", "mi_avg_nats", "global_leakage",
                                          "pari"};
    auto rows = report.summary;
    std::stable_sort(rows.begin(), rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
      return std::tie(a.agents, a.beta) < std::tie(b.agents, b.beta);
    });
    auto out = OpenOut(out_dir / "beta_tradeoff.csv");
    WriteAggregateHeader(out, "N,beta,arm,runs", fields);
    for (const auto& r : rows) {
      if (r.arm == "early") continue;
      out << r.agents << ',' << Num(r.beta) << ',' << r.arm << ',' << r.runs;
      WriteAggregateColumns(out, r, fields);
    }
  }
  {
    auto out = OpenOut(out_dir / "errors.csv");
    out << "path,error\n";
    for (const auto& [path, msg] : report.errors) out << CsvField(path) << ',' << CsvField(msg) << '\n';
  }
}

std::vector<fs::path> glob_run_dirs(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::set<fs::path> dirs;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      fs::path p(g.gl_pathv[i]);
      dirs.insert(fs::is_directory(p) ? p : p.parent_path());
    }
  }
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) throw std::runtime_error("glob failed for " + pattern);
  return {dirs.begin(), dirs.end()};
}

int cmd_report(const std::string& pattern, const fs::path& out_dir, std::ostream& log) {
  const auto dirs = glob_run_dirs(pattern);
  if (dirs.empty()) throw std::invalid_argument("report: nothing matches " + pattern);
  const Report report = build_report(dirs);
  write_report(report, out_dir);
  log << "aggregated " << report.runs.size() << " runs into " << report.summary.size()
      << " rows under " << out_dir.string() << '\n';
  for (const auto& [path, msg] : report.errors) log << "skipped " << path << ": " << msg << '\n';
  for (const auto& c : report.correlation) {
    log << "pearson(MI_avg, SB) " << c.arm << ": " << Num(c.pearson) << '\n';
  }
  return report.errors.empty() ? 0 : 1;
}

// ---------------------------------------------------------------- runs

int cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const fs::path root = output_root(config);
  for (const auto seed : config.seeds) {
    const RunConfig single =
        single_run_config(config, config.agents, config.beta, config.selective, seed);
    const RunSummary s = execute_run(single, root);
    const auto& m = s.metrics;
    log << "run " << s.run_id << (s.reused ? " (reused)" : "") << " seed " << seed << ": ce "
        << Num(m.ce) << " bs " << Num(m.core.bs) << " la " << Num(m.core.la) << " mi_avg "
        << Num(m.mi_avg) << " pi " << Num(m.pi) << " pari " << Num(m.pari) << " -> "
        << s.dir.string() << '\n';
  }
  return 0;
}

std::vector<RunConfig> sweep_grid(const RunConfig& config) {
  config.validate();
  const std::vector<int> depths =
      config.sweep_depths.empty() ? std::vector<int>{config.agents} : config.sweep_depths;
  const std::vector<double> betas =
      config.sweep_betas.empty() ? std::vector<double>{config.beta} : config.sweep_betas;
  const std::vector<Selective> modes = config.sweep_selective.empty()
                                           ? std::vector<Selective>{config.selective}
                                           : config.sweep_selective;
  if (depths.empty() || betas.empty() || modes.empty() || config.seeds.empty()) {
    throw std::invalid_argument("sweep grid is empty");
  }
  std::vector<RunConfig> grid;
  std::set<std::string> seen;
  for (const int n : depths) {
    for (const double beta : betas) {
      for (const Selective mode : modes) {
        for (const auto seed : config.seeds) {
          RunConfig single = single_run_config(config, n, beta, mode, seed);
          if (arm_of(single) == "baseline") {
            single = single_run_config(config, n, 0.0, Selective::kAll, seed);
            single.betas.reset();
          }
          if (seen.insert(run_id(single)).second) grid.push_back(std::move(single));
        }
      }
    }
  }
  return grid;
}

SweepResult run_sweep(const RunConfig& config, int jobs, std::ostream& log) {
  const auto grid = sweep_grid(config);
  const fs::path root = output_root(config);
  std::vector<std::optional<RunSummary>> done(grid.size());
  std::vector<std::string> errors(grid.size());
  std::mutex log_mu;

  auto run_one = [&](std::size_t i, std::optional<double> baseline) {
    try {
      done[i] = execute_run(grid[i], root, baseline);
      std::lock_guard lock(log_mu);
      log << "run " << done[i]->run_id << (done[i]->reused ? " (reused)" : "") << " "
          << arm_of(grid[i]) << " N=" << grid[i].agents << " beta=" << grid[i].nominal_beta()
          << " seed=" << grid[i].seeds.front() << '\n';
    } catch (const std::exception& e) {
      errors[i] = e.what();
      std::lock_guard lock(log_mu);
      log << "run " << run_id(grid[i]) << " failed: " << e.what() << '\n';
    }
  };

  std::vector<std::size_t> baselines, penalized;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    (arm_of(grid[i]) == "baseline" ? baselines : penalized).push_back(i);
  }
  ParallelFor(baselines.size(), jobs, [&](std::size_t k) { run_one(baselines[k], std::nullopt); });

  std::map<std::pair<int, std::uint64_t>, double> baseline_mi;
  for (const auto i : baselines) {
    if (done[i]) baseline_mi[{grid[i].agents, grid[i].seeds.front()}] = done[i]->metrics.mi_avg;
  }
  ParallelFor(penalized.size(), jobs, [&](std::size_t k) {
    const std::size_t i = penalized[k];
    std::optional<double> paired = config.mi_baseline;
    if (!paired) {
      const auto it = baseline_mi.find({grid[i].agents, grid[i].seeds.front()});
      if (it == baseline_mi.end()) {
        errors[i] = "paired baseline run failed";
        return;
      }
      paired = it->second;
    }
    run_one(i, paired);
  });

  SweepResult result;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (done[i]) {
      result.runs.push_back(*done[i]);
    } else {
      result.failures.push_back({run_id(grid[i]), grid[i].agents, grid[i].nominal_beta(),
                                 grid[i].selective, grid[i].seeds.front(), errors[i]});
    }
  }

  RunConfig sweep_key = config;
  sweep_key.output_dir = RunConfig{}.output_dir;
  result.report_dir = root / "sweeps" / git_blob_hash(serialize_config(sweep_key)).substr(0, 12);
  fs::create_directories(result.report_dir);
  {
    auto out = OpenOut(result.report_dir / "failures.csv");
    out << "run_id,N,beta,selective,seed,error\n";
    for (const auto& f : result.failures) {
      out << f.run_id << ',' << f.agents << ',' << Num(f.beta) << ',' << to_string(f.selective)
          << ',' << f.seed << ',' << CsvField(f.error) << '\n';
    }
  }
  {
    auto out = OpenOut(result.report_dir / "runs.csv");
    out << "run_id,arm,N,beta,seed\n";
    for (const auto& r : result.runs) {
      out << r.run_id << ',' << arm_of(r.config) << ',' << r.metrics.agents << ','
          << Num(r.metrics.beta) << ',' << r.metrics.seed << '\n';
    }
  }
  if (!result.runs.empty()) write_report(build_report(result.runs), result.report_dir);
  return result;
}

int cmd_sweep(const RunConfig& config, int jobs, std::ostream& log) {
  const auto result = run_sweep(config, jobs, log);
  log << result.runs.size() << " runs, " << result.failures.size() << " failures; report in "
      << result.report_dir.string() << '\n';
  return result.failures.empty() ? 0 : 1;
}

int cmd_probe(const fs::path& run_dir, std::ostream& log) {
  const RunSummary s = reprobe_run(run_dir);
  log << "run " << s.run_id << ": local leakage " << Num(local_leakage(s.probes))
      << " depth leakage " << Num(depth_leakage(s.probes)) << " global leakage "
      << Num(global_leakage(s.probes)) << '\n';
  for (const auto& r : s.probes) {
    log << "  O" << r.observer << " -> S" << r.target << ": accuracy " << Num(r.accuracy)
        << " margin " << Num(r.margin) << '\n';
  }
  return 0;
}

}  // namespace leakchain::harness
