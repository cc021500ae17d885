#include "aqcnn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace fs = std::filesystem;

namespace aqcnn {

namespace {
std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over a string; good enough for cache keys.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string idx_path(const std::string& dir, const std::string& name) {
  if (fs::exists(dir + "/" + name)) return dir + "/" + name;
  if (fs::exists(dir + "/" + name + ".gz")) return dir + "/" + name + ".gz";
  throw std::runtime_error("missing IDX file " + dir + "/" + name +
                           " (run `aqcnn synth` or place the dataset there)");
}

RawDataset load_split(const std::string& data_dir, const std::string& dataset,
                      bool test) {
  const std::string dir = data_dir + "/" + dataset;
  const std::string prefix = test ? "t10k" : "train";
  return load_idx(idx_path(dir, prefix + "-images-idx3-ubyte"),
                  idx_path(dir, prefix + "-labels-idx1-ubyte"));
}

std::map<int, int> relabel_map(const std::vector<int>& classes) {
  std::map<int, int> m;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    m[classes[i]] = static_cast<int>(i);
  }
  return m;
}

// Deterministic subsample of `count` items (seeded shuffle of indices).
RawDataset subsample(const RawDataset& ds, std::size_t count,
                     std::uint64_t seed) {
  std::vector<std::size_t> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::uint64_t state = seed;
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[splitmix(state) % i]);
  }
  count = std::min(count, idx.size());
  RawDataset out;
  out.rows = ds.rows;
  out.cols = ds.cols;
  for (std::size_t i = 0; i < count; ++i) {
    out.images.push_back(ds.images[idx[i]]);
    out.labels.push_back(ds.labels[idx[i]]);
  }
  return out;
}

std::string prepared_dir(const HarnessConfig& cfg) {
  return cfg.data_dir + "/prepared";
}

std::string prepared_stem(const TaskSpec& task, int n,
                          const HarnessConfig& cfg) {
  std::ostringstream s;
  s << prepared_dir(cfg) << "/" << task.id << "_n" << n << "_s"
    << cfg.source_size << "_t" << cfg.test_size << "_seed" << cfg.split_seed;
  return s.str();
}

bool is_qcnn(const std::string& model) { return model.rfind("qcnn", 0) == 0; }

std::vector<TrainSample> to_train_samples(const std::vector<Sample>& samples,
                                          int num_classes, int T) {
  std::vector<TrainSample> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    TrainSample t;
    t.features = s.features;
    t.label = s.label;
    t.target = class_code(s.label, num_classes, T);
    out.push_back(std::move(t));
  }
  return out;
}

// Target training subset: class-balanced halves for the 40-sample regime,
// seeded shuffle otherwise.
std::vector<Sample> draw_target_train(const std::vector<Sample>& pool,
                                      int size, std::uint64_t seed) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::uint64_t state = seed ^ 0x7a4f5cbd31ULL;
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[splitmix(state) % i]);
  }
  std::vector<Sample> out;
  if (size <= 40) {
    const int per_class = size / 2;
    int c0 = 0, c1 = 0;
    for (std::size_t i : idx) {
      const Sample& s = pool[i];
      if (s.label == 0 && c0 < per_class) {
        out.push_back(s);
        ++c0;
      } else if (s.label == 1 && c1 < size - per_class) {
        out.push_back(s);
        ++c1;
      }
      if (static_cast<int>(out.size()) == size) break;
    }
    if (static_cast<int>(out.size()) < size) {
      throw std::runtime_error("target pool too small for a balanced draw");
    }
  } else {
    for (std::size_t i = 0;
         i < idx.size() && out.size() < static_cast<std::size_t>(size); ++i) {
      out.push_back(pool[idx[i]]);
    }
    if (static_cast<int>(out.size()) < size) {
      throw std::runtime_error("target pool smaller than requested size");
    }
  }
  return out;
}

nlohmann::json train_config_json(const TrainConfig& c) {
  return {{"lr", c.learning_rate}, {"beta1", c.beta1},   {"beta2", c.beta2},
          {"eps", c.epsilon},      {"batch", c.batch_size}, {"epochs", c.epochs}};
}
}  // namespace

const std::vector<TaskSpec>& all_tasks() {
  static const std::vector<TaskSpec> tasks = {
      {"tl1", "mnist", {1, 2}, false, "mnist", {5, 7}},
      {"tl2", "mnist", {5, 7}, false, "mnist", {1, 2}},
      {"tl3", "mnist", {1, 2}, false, "mnist", {0, 8}},
      {"tl4", "mnist", {5, 7}, false, "mnist", {0, 8}},
      {"tl5", "fashion", {0, 1}, false, "mnist", {0, 8}},
      {"tl6", "mnist", {1, 2, 3, 4, 5, 6, 7, 9}, true, "mnist", {0, 8}},
      {"tl7", "fashion", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, true, "mnist", {0, 8}},
  };
  return tasks;
}

const TaskSpec& task_by_id(const std::string& id) {
  for (const TaskSpec& t : all_tasks()) {
    if (t.id == id) return t;
  }
  throw std::invalid_argument("unknown task id: " + id);
}

HarnessConfig default_harness_config() {
  HarnessConfig cfg;
  cfg.train_large.epochs = 20;
  cfg.train_large.learning_rate = 0.1;
  cfg.train_small.epochs = 200;
  cfg.train_small.learning_rate = 0.1;
  return cfg;
}

std::string HarnessConfig::to_json() const {
  nlohmann::json j;
  j["source_size"] = source_size;
  j["test_size"] = test_size;
  j["split_seed"] = split_seed;
  j["train_large"] = train_config_json(train_large);
  j["train_small"] = train_config_json(train_small);
  j["svm_c"] = svm_c;
  return j.dump();
}

void prepare_task(const TaskSpec& task, int n, const HarnessConfig& cfg) {
  const int dim = 1 << n;
  fs::create_directories(prepared_dir(cfg));
  const std::string stem = prepared_stem(task, n, cfg);
  if (fs::exists(stem + "_source.bin") && fs::exists(stem + "_pool.bin") &&
      fs::exists(stem + "_test.bin") && fs::exists(stem + "_reducer.bin")) {
    return;
  }

  const RawDataset source_full = select_classes(
      load_split(cfg.data_dir, task.source_data, false), task.source_classes,
      relabel_map(task.source_classes));
  const RawDataset source_train =
      subsample(source_full, static_cast<std::size_t>(cfg.source_size),
                cfg.split_seed ^ fnv1a(task.id + "src"));

  // The encoding front end is part of what transfers: the reducer is fit on
  // the source training split and reused for the target data.
  const Reducer reducer = fit_reducer(source_train, dim);

  const RawDataset target_pool = select_classes(
      load_split(cfg.data_dir, task.target_data, false), task.target_classes,
      relabel_map(task.target_classes));
  const RawDataset target_test = subsample(
      select_classes(load_split(cfg.data_dir, task.target_data, true),
                     task.target_classes, relabel_map(task.target_classes)),
      static_cast<std::size_t>(cfg.test_size),
      cfg.split_seed ^ fnv1a(task.id + "test"));

  save_reducer(stem + "_reducer.bin", reducer);
  save_samples(stem + "_source.bin", reduce(reducer, source_train));
  save_samples(stem + "_pool.bin", reduce(reducer, target_pool));
  save_samples(stem + "_test.bin", reduce(reducer, target_test));
}

void prepare_all(const HarnessConfig& cfg, const std::vector<std::string>& ids,
                 const std::vector<int>& ns) {
  for (const std::string& id : ids) {
    for (int n : ns) prepare_task(task_by_id(id), n, cfg);
  }
}

PreparedTask load_prepared(const TaskSpec& task, int n,
                           const HarnessConfig& cfg) {
  const std::string stem = prepared_stem(task, n, cfg);
  if (!fs::exists(stem + "_source.bin")) {
    prepare_task(task, n, cfg);
  }
  PreparedTask p;
  p.source_train = load_samples(stem + "_source.bin");
  p.target_pool = load_samples(stem + "_pool.bin");
  p.target_test = load_samples(stem + "_test.bin");
  p.num_source_classes = static_cast<int>(task.source_classes.size());
  return p;
}

namespace {
std::string pretrain_key(const TaskSpec& task, const std::string& model, int n,
                         std::uint64_t seed, const HarnessConfig& cfg) {
  std::ostringstream s;
  s << task.id << '|' << model << '|' << n << '|' << seed << '|'
    << cfg.source_size << '|' << cfg.split_seed << '|'
    << train_config_json(cfg.train_large).dump();
  return std::to_string(fnv1a(s.str()));
}

std::vector<double> random_params(std::size_t count, std::uint64_t seed) {
  std::uint64_t state = seed ^ 0x243f6a8885a308d3ULL;
  std::vector<double> p(count);
  for (double& v : p) {
    v = 2.0 * std::numbers::pi *
        (static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53);
  }
  return p;
}
}  // namespace

std::vector<double> pretrain_source(const TaskSpec& task,
                                    const std::string& model, int n,
                                    std::uint64_t seed,
                                    const HarnessConfig& cfg) {
  fs::create_directories(cfg.work_dir + "/pretrain");
  const std::string path = cfg.work_dir + "/pretrain/" +
                           pretrain_key(task, model, n, seed, cfg) + ".json";
  if (fs::exists(path)) {
    try {
      std::ifstream in(path);
      const nlohmann::json j = nlohmann::json::parse(in);
      return j.at("params").get<std::vector<double>>();
    } catch (const std::exception& e) {
      std::cerr << "warning: pretrain cache " << path
                << " unreadable, recomputing (" << e.what() << ")\n";
    }
  }

  const PreparedTask data = load_prepared(task, n, cfg);
  TrainConfig tc = cfg.train_large;
  tc.seed = seed;
  std::vector<double> params;
  if (is_qcnn(model)) {
    const ModelSpec spec = build_model(variant_from_name(model), n);
    const std::vector<TrainSample> train = to_train_samples(
        data.source_train, data.num_source_classes, spec.num_qubits - 1);
    const FreezePlan all = make_freeze_plan(spec, spec.n_layers);
    params = fit(spec, random_params(static_cast<std::size_t>(spec.total_params), seed),
                 train, tc, all)
                 .params;
  } else {
    const CcnnSpec spec = build_ccnn(model == "ccnn-a" ? 'A' : 'B', n);
    const std::vector<TrainSample> train =
        to_train_samples(data.source_train, data.num_source_classes, 1);
    const FreezePlan all = ccnn_freeze_plan(spec, spec.n);
    params = ccnn_fit(spec, ccnn_init(spec, seed), train, tc, all).params;
  }

  nlohmann::json j;
  j["params"] = params;
  std::ofstream out(path);
  out << j.dump() << '\n';
  return params;
}

RunRecord run_transfer(const TaskSpec& task, const std::string& model, int n,
                       int m, int target_size, std::uint64_t seed,
                       const HarnessConfig& cfg) {
  if (m < 0 || m > n) {
    throw std::invalid_argument("retraining depth m must be in 0..n");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedTask data = load_prepared(task, n, cfg);
  const std::vector<Sample> target_train =
      draw_target_train(data.target_pool, target_size, seed);

  TrainConfig tc = target_size <= 40 ? cfg.train_small : cfg.train_large;
  tc.seed = seed;

  RunRecord rec;
  rec.task = task.id;
  rec.model = model;
  rec.n = n;
  rec.m = m;
  rec.target_size = target_size;
  rec.seed = seed;
  rec.from_scratch = (m == n);
  {
    nlohmann::json c;
    c["train"] = train_config_json(tc);
    c["harness"] = nlohmann::json::parse(cfg.to_json());
    rec.config = c.dump();
  }

  std::vector<int> predictions, labels;
  for (const Sample& s : data.target_test) labels.push_back(s.label);

  if (is_qcnn(model)) {
    const ModelSpec spec = build_model(variant_from_name(model), n);
    const int T = spec.num_qubits - 1;
    const std::vector<TrainSample> train = to_train_samples(target_train, 2, T);
    const std::vector<TrainSample> test =
        to_train_samples(data.target_test, 2, T);

    std::vector<double> params =
        rec.from_scratch
            ? random_params(static_cast<std::size_t>(spec.total_params), seed)
            : pretrain_source(task, model, n, seed, cfg);
    const FreezePlan freeze = make_freeze_plan(spec, m);

    FitResult fitres;
    if (m > 0) {
      fitres = fit(spec, std::move(params), train, tc, freeze);
    } else {
      fitres.params = std::move(params);
      fitres.loss_history.push_back(batch_loss(spec, fitres.params, train));
    }
    rec.final_loss = fitres.loss_history.back();

    // Readout is refit on the target training data after every fit.
    const auto pts = extract_bloch(spec, fitres.params, train);
    std::vector<BlochVector> bloch;
    std::vector<int> svm_labels;
    for (const auto& [b, l] : pts) {
      bloch.push_back(b);
      svm_labels.push_back(l == 1 ? 1 : -1);
    }
    const DecisionRule rule = make_decision_rule(bloch, svm_labels, cfg.svm_c);
    for (const TrainSample& s : test) {
      predictions.push_back(classify(spec, fitres.params, rule, s.features));
    }
    nlohmann::json r;
    r["w"] = rule.w;
    r["b"] = rule.b;
    r["axis"] = rule.axis;
    r["angle"] = rule.angle;
    rec.readout = r.dump();
  } else {
    const CcnnSpec spec = build_ccnn(model == "ccnn-a" ? 'A' : 'B', n);
    const std::vector<TrainSample> train = to_train_samples(target_train, 2, 1);

    std::vector<double> weights = rec.from_scratch
                                      ? ccnn_init(spec, seed)
                                      : pretrain_source(task, model, n, seed, cfg);
    const FreezePlan freeze = ccnn_freeze_plan(spec, m);
    FitResult fitres;
    if (m > 0) {
      fitres = ccnn_fit(spec, std::move(weights), train, tc, freeze);
    } else {
      fitres.params = std::move(weights);
      fitres.loss_history.push_back(ccnn_loss(spec, fitres.params, train));
    }
    rec.final_loss = fitres.loss_history.back();
    for (const Sample& s : data.target_test) {
      predictions.push_back(ccnn_classify(spec, fitres.params, s.features));
    }
  }

  rec.accuracy = accuracy(predictions, labels);
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  return rec;
}

SweepConfig SweepConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  SweepConfig cfg;
  cfg.harness = default_harness_config();
  cfg.tasks = j.value("tasks", std::vector<std::string>{});
  cfg.models = j.value("models", std::vector<std::string>{});
  cfg.ns = j.value("ns", std::vector<int>{3});
  cfg.ms = j.value("ms", std::vector<int>{});
  cfg.target_sizes = j.value("target_sizes", std::vector<int>{12000, 40});
  cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{1});
  cfg.workers = j.value("workers", 1);
  if (j.contains("data_dir")) cfg.harness.data_dir = j["data_dir"];
  if (j.contains("work_dir")) cfg.harness.work_dir = j["work_dir"];
  if (j.contains("source_size")) cfg.harness.source_size = j["source_size"];
  if (j.contains("test_size")) cfg.harness.test_size = j["test_size"];
  if (j.contains("epochs_large"))
    cfg.harness.train_large.epochs = j["epochs_large"];
  if (j.contains("epochs_small"))
    cfg.harness.train_small.epochs = j["epochs_small"];
  if (j.contains("lr")) {
    cfg.harness.train_large.learning_rate = j["lr"];
    cfg.harness.train_small.learning_rate = j["lr"];
  }
  return cfg;
}

std::vector<RunRecord> load_records(const std::string& work_dir) {
  std::vector<RunRecord> records;
  std::ifstream in(work_dir + "/records.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(RunRecord::from_json(line));
  }
  return records;
}

SweepResult sweep(const SweepConfig& cfg) {
  struct Cell {
    std::string task, model;
    int n, m, size;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const std::string& t : cfg.tasks) {
    for (const std::string& mo : cfg.models) {
      for (int n : cfg.ns) {
        std::vector<int> ms = cfg.ms;
        if (ms.empty()) {
          for (int m = 0; m <= n; ++m) ms.push_back(m);
        }
        for (int m : ms) {
          if (m > n) continue;
          for (int sz : cfg.target_sizes) {
            for (std::uint64_t seed : cfg.seeds) {
              cells.push_back({t, mo, n, m, sz, seed});
            }
          }
        }
      }
    }
  }

  SweepResult result;
  if (cells.empty()) return result;

  fs::create_directories(cfg.harness.work_dir);
  std::vector<RunRecord> existing = load_records(cfg.harness.work_dir);
  auto done = [&existing](const Cell& c) {
    return std::any_of(existing.begin(), existing.end(),
                       [&c](const RunRecord& r) {
                         return r.task == c.task && r.model == c.model &&
                                r.n == c.n && r.m == c.m &&
                                r.target_size == c.size && r.seed == c.seed;
                       });
  };

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (done(cells[i])) {
      result.records.push_back(*std::find_if(
          existing.begin(), existing.end(), [&](const RunRecord& r) {
            const Cell& c = cells[i];
            return r.task == c.task && r.model == c.model && r.n == c.n &&
                   r.m == c.m && r.target_size == c.size && r.seed == c.seed;
          }));
    } else {
      todo.push_back(i);
    }
  }

  // Make sure every prepared cache exists before workers start.
  for (std::size_t i : todo) {
    prepare_task(task_by_id(cells[i].task), cells[i].n, cfg.harness);
  }

  std::vector<RunRecord> fresh(todo.size());
  std::vector<int> status(todo.size(), 0);  // 1 ok, -1 failed
  std::mutex queue_mutex;
  std::size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> lock(queue_mutex);
        if (next >= todo.size()) return;
        k = next++;
      }
      const Cell& c = cells[todo[k]];
      try {
        fresh[k] = run_transfer(task_by_id(c.task), c.model, c.n, c.m, c.size,
                                c.seed, cfg.harness);
        status[k] = 1;
      } catch (const std::exception& e) {
        std::cerr << "cell failed (" << c.task << ", " << c.model << ", n="
                  << c.n << ", m=" << c.m << ", size=" << c.size << ", seed="
                  << c.seed << "): " << e.what() << '\n';
        status[k] = -1;
      }
    }
  };

  const int nworkers = std::max(1, cfg.workers);
  if (nworkers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nworkers; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  // Append in deterministic cell order.
  std::ofstream out(cfg.harness.work_dir + "/records.jsonl", std::ios::app);
  for (std::size_t k = 0; k < todo.size(); ++k) {
    if (status[k] == 1) {
      out << fresh[k].to_json() << '\n';
      result.records.push_back(fresh[k]);
    } else {
      ++result.failures;
    }
  }
  return result;
}

void report(std::span<const RunRecord> records, const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_records_csv(out_dir + "/records.csv", records);
  write_summary_report(out_dir + "/summary.json", aggregate(records));
}

}  // namespace aqcnn
