#include "aqcnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace aqcnn {

namespace {
constexpr int kSchemaVersion = 1;
}

std::string RunRecord::to_json() const {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  j["task"] = task;
  j["model"] = model;
  j["n"] = n;
  j["m"] = m;
  j["target_size"] = target_size;
  j["seed"] = seed;
  j["accuracy"] = accuracy;
  j["final_loss"] = final_loss;
  j["seconds"] = seconds;
  j["from_scratch"] = from_scratch;
  j["config"] = nlohmann::json::parse(config);
  j["readout"] = nlohmann::json::parse(readout);
  return j.dump();
}

RunRecord RunRecord::from_json(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  RunRecord r;
  r.task = j.at("task");
  r.model = j.at("model");
  r.n = j.at("n");
  r.m = j.at("m");
  r.target_size = j.at("target_size");
  r.seed = j.at("seed");
  r.accuracy = j.at("accuracy");
  r.final_loss = j.value("final_loss", 0.0);
  r.seconds = j.value("seconds", 0.0);
  r.from_scratch = j.value("from_scratch", false);
  r.config = j.value("config", nlohmann::json::object()).dump();
  r.readout = j.value("readout", nlohmann::json::object()).dump();
  return r;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw std::invalid_argument("accuracy requires equal nonempty lengths");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double rpr(double acc_small, double acc_large) {
  if (acc_large <= 0.0) {
    throw std::domain_error("RPR undefined for zero large-data accuracy");
  }
  return acc_small / acc_large;
}

double accuracy_drop(double acc_large, double acc_small) {
  return acc_large - acc_small;
}

bool positive_transfer(const std::map<int, double>& acc_by_m, int n) {
  const auto scratch = acc_by_m.find(n);
  if (scratch == acc_by_m.end()) {
    throw std::invalid_argument("positive_transfer needs an m = n record");
  }
  double best_partial = -std::numeric_limits<double>::infinity();
  bool any_partial = false;
  for (const auto& [m, acc] : acc_by_m) {
    if (m < n) {
      best_partial = std::max(best_partial, acc);
      any_partial = true;
    }
  }
  if (!any_partial) {
    throw std::invalid_argument("positive_transfer needs an m < n record");
  }
  return best_partial > scratch->second;
}

namespace {
// (task, model, n, m, size) -> mean accuracy over seeds.
using CellKey = std::tuple<std::string, std::string, int, int, int>;

std::map<CellKey, double> cell_means(std::span<const RunRecord> records) {
  std::map<CellKey, std::pair<double, int>> acc;
  for (const RunRecord& r : records) {
    auto& [sum, count] = acc[{r.task, r.model, r.n, r.m, r.target_size}];
    sum += r.accuracy;
    ++count;
  }
  std::map<CellKey, double> out;
  for (const auto& [k, sc] : acc) out[k] = sc.first / sc.second;
  return out;
}
}  // namespace

Summary aggregate(std::span<const RunRecord> records,
                  const AggregateOptions& opts) {
  if (records.empty()) return {};
  Summary summary;
  const std::map<CellKey, double> cells = cell_means(records);

  std::set<std::string> tasks, models;
  std::set<int> ns, sizes;
  for (const auto& [k, v] : cells) {
    tasks.insert(std::get<0>(k));
    models.insert(std::get<1>(k));
    ns.insert(std::get<2>(k));
    sizes.insert(std::get<4>(k));
  }
  const int size_small = *sizes.begin();
  const int size_large = *sizes.rbegin();

  auto cell = [&](const std::string& t, const std::string& mo, int n, int m,
                  int sz) -> const double* {
    const auto it = cells.find({t, mo, n, m, sz});
    return it == cells.end() ? nullptr : &it->second;
  };

  // Positive-transfer predicate per (task, model, n, size), and task-level OR.
  for (const std::string& t : tasks) {
    for (int n : ns) {
      bool task_flag = false;
      for (const std::string& mo : models) {
        for (int sz : sizes) {
          std::map<int, double> by_m;
          for (int m = 0; m <= n; ++m) {
            if (const double* a = cell(t, mo, n, m, sz)) by_m[m] = *a;
          }
          if (by_m.count(n) && by_m.size() > 1) {
            const bool flag = positive_transfer(by_m, n);
            summary.cell_positive[{t, mo, n, sz}] = flag;
            task_flag = task_flag || flag;
          }
        }
      }
      summary.task_positive[{t, n}] = task_flag;
    }
  }

  auto m_included = [&](int m, int n) {
    if (m == 0 && !opts.include_m0) return false;
    if (m == n && !opts.include_mn) return false;
    return true;
  };

  // Mean absolute accuracy drop per (model, n), across tasks and depths.
  for (const std::string& mo : models) {
    for (int n : ns) {
      DropSummary d;
      d.model = mo;
      d.n = n;
      double sum_all = 0.0, sum_pos = 0.0;
      for (const std::string& t : tasks) {
        const bool pos = summary.task_positive[{t, n}];
        for (int m = 0; m <= n; ++m) {
          if (!m_included(m, n)) continue;
          const double* al = cell(t, mo, n, m, size_large);
          const double* as = cell(t, mo, n, m, size_small);
          if (!al || !as) continue;
          const double drop = std::fabs(accuracy_drop(*al, *as));
          sum_all += drop;
          ++d.cells_all;
          if (pos) {
            sum_pos += drop;
            ++d.cells_positive;
          }
        }
      }
      if (d.cells_all == 0) continue;
      d.mean_abs_drop_all = sum_all / d.cells_all;
      d.mean_abs_drop_positive =
          d.cells_positive ? sum_pos / d.cells_positive
                           : std::numeric_limits<double>::quiet_NaN();
      summary.drops.push_back(std::move(d));
    }
  }

  // Mean RPR per (model, n, m).
  for (const std::string& mo : models) {
    for (int n : ns) {
      for (int m = 0; m <= n; ++m) {
        if (!m_included(m, n)) continue;
        RprPoint p;
        p.model = mo;
        p.n = n;
        p.m = m;
        double sum_all = 0.0, sum_pos = 0.0;
        for (const std::string& t : tasks) {
          const double* al = cell(t, mo, n, m, size_large);
          const double* as = cell(t, mo, n, m, size_small);
          if (!al || !as || *al <= 0.0) continue;
          const double v = rpr(*as, *al);
          sum_all += v;
          ++p.cells_all;
          if (summary.task_positive[{t, n}]) {
            sum_pos += v;
            ++p.cells_positive;
          }
        }
        if (p.cells_all == 0) continue;
        p.mean_rpr_all = sum_all / p.cells_all;
        p.mean_rpr_positive =
            p.cells_positive ? sum_pos / p.cells_positive
                             : std::numeric_limits<double>::quiet_NaN();
        summary.rpr_points.push_back(std::move(p));
      }
    }
  }

  // Best-m table per (task, model, n, size); ties go to smaller m.
  for (const std::string& t : tasks) {
    for (const std::string& mo : models) {
      for (int n : ns) {
        for (int sz : sizes) {
          BestCell best;
          best.task = t;
          best.model = mo;
          best.n = n;
          best.size = sz;
          best.best_accuracy = -1.0;
          for (int m = 0; m <= n; ++m) {
            if (const double* a = cell(t, mo, n, m, sz)) {
              if (*a > best.best_accuracy) {
                best.best_accuracy = *a;
                best.best_m = m;
              }
            }
          }
          if (best.best_accuracy >= 0.0) {
            summary.best_cells.push_back(std::move(best));
          }
        }
      }
    }
  }
  return summary;
}

void write_records_csv(const std::string& path,
                       std::span<const RunRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "model,n,m,task,size,seed,accuracy\n";
  for (const RunRecord& r : records) {
    out << r.model << ',' << r.n << ',' << r.m << ',' << r.task << ','
        << r.target_size << ',' << r.seed << ',' << r.accuracy << '\n';
  }
}

void write_summary_report(const std::string& path, const Summary& summary) {
  nlohmann::json j;
  for (const DropSummary& d : summary.drops) {
    j["accuracy_drop"].push_back({{"model", d.model},
                                  {"n", d.n},
                                  {"mean_abs_drop_all", d.mean_abs_drop_all},
                                  {"mean_abs_drop_positive",
                                   d.cells_positive ? nlohmann::json(d.mean_abs_drop_positive)
                                                    : nlohmann::json()},
                                  {"cells_all", d.cells_all},
                                  {"cells_positive", d.cells_positive}});
  }
  for (const RprPoint& p : summary.rpr_points) {
    j["rpr"].push_back({{"model", p.model},
                        {"n", p.n},
                        {"m", p.m},
                        {"mean_rpr_all", p.mean_rpr_all},
                        {"mean_rpr_positive",
                         p.cells_positive ? nlohmann::json(p.mean_rpr_positive)
                                          : nlohmann::json()},
                        {"cells_all", p.cells_all}});
  }
  for (const BestCell& b : summary.best_cells) {
    j["best_m"].push_back({{"task", b.task},
                           {"model", b.model},
                           {"n", b.n},
                           {"size", b.size},
                           {"accuracy", b.best_accuracy},
                           {"m", b.best_m}});
  }
  for (const auto& [key, flag] : summary.task_positive) {
    j["task_positive"].push_back(
        {{"task", key.first}, {"n", key.second}, {"positive", flag}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace aqcnn
