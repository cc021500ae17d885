#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aqcnn/baseline.hpp"
#include "aqcnn/dataio.hpp"
#include "aqcnn/metrics.hpp"
#include "aqcnn/readout.hpp"

namespace aqcnn {

struct TaskSpec {
  std::string id;                   // "tl1" .. "tl7"
  std::string source_data;          // "mnist" or "fashion"
  std::vector<int> source_classes;  // relabeled to 0..K-1 in listed order
  bool source_multiclass = false;
  std::string target_data;
  std::vector<int> target_classes;  // binary: first -> 0, second -> 1
};

const std::vector<TaskSpec>& all_tasks();
const TaskSpec& task_by_id(const std::string& id);

struct HarnessConfig {
  std::string data_dir = "data";
  std::string work_dir = "runs";
  int source_size = 12000;
  int test_size = 400;
  std::uint64_t split_seed = 1234;
  TrainConfig train_large{};  // epochs default 30
  TrainConfig train_small{};  // epochs default 200
  double svm_c = 1.0;

  std::string to_json() const;
};

HarnessConfig default_harness_config();

// Builds per-(task, n) reduced-feature caches from the IDX files under
// <data_dir>/mnist and <data_dir>/fashion.
void prepare_task(const TaskSpec& task, int n, const HarnessConfig& cfg);
void prepare_all(const HarnessConfig& cfg, const std::vector<std::string>& ids,
                 const std::vector<int>& ns);

struct PreparedTask {
  std::vector<Sample> source_train;
  std::vector<Sample> target_pool;  // full target-class training pool
  std::vector<Sample> target_test;  // held-out, from the test IDX files
  int num_source_classes = 2;
};

PreparedTask load_prepared(const TaskSpec& task, int n,
                           const HarnessConfig& cfg);

// Source pretraining, cached on disk by a content key over
// (task, model, n, seed, config).
std::vector<double> pretrain_source(const TaskSpec& task,
                                    const std::string& model, int n,
                                    std::uint64_t seed,
                                    const HarnessConfig& cfg);

RunRecord run_transfer(const TaskSpec& task, const std::string& model, int n,
                       int m, int target_size, std::uint64_t seed,
                       const HarnessConfig& cfg);

struct SweepConfig {
  std::vector<std::string> tasks;
  std::vector<std::string> models;
  std::vector<int> ns{3};
  std::vector<int> ms;  // empty = full 0..n sweep
  std::vector<int> target_sizes{12000, 40};
  std::vector<std::uint64_t> seeds{1};
  int workers = 1;
  HarnessConfig harness;

  static SweepConfig from_json_file(const std::string& path);
};

struct SweepResult {
  std::vector<RunRecord> records;
  int failures = 0;
};

// Runs every cell once; completed cells found in the results store are
// skipped. Records are appended to <work_dir>/records.jsonl.
SweepResult sweep(const SweepConfig& cfg);

std::vector<RunRecord> load_records(const std::string& work_dir);
void report(std::span<const RunRecord> records, const std::string& out_dir);

}  // namespace aqcnn
