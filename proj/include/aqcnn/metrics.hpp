#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace aqcnn {

struct RunRecord {
  std::string task;   // "tl1".."tl7"
  std::string model;  // "qcnn-n", "qcnn-z", "qcnn-g", "ccnn-a", "ccnn-b"
  int n = 3;
  int m = 0;
  int target_size = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double final_loss = 0.0;
  double seconds = 0.0;
  bool from_scratch = false;
  std::string config = "{}";
  std::string readout = "{}";

  std::string to_json() const;
  static RunRecord from_json(const std::string& line);
};

double accuracy(std::span<const int> predictions, std::span<const int> labels);
double rpr(double acc_small, double acc_large);
double accuracy_drop(double acc_large, double acc_small);

// acc_by_m maps retraining depth -> accuracy for one (task, model, n, size)
// group; true iff the best m < n strictly beats m = n.
bool positive_transfer(const std::map<int, double>& acc_by_m, int n);

struct AggregateOptions {
  bool include_m0 = true;
  bool include_mn = true;
};

struct DropSummary {
  std::string model;
  int n = 0;
  double mean_abs_drop_all = 0.0;
  double mean_abs_drop_positive = 0.0;  // NaN when no positive-transfer task
  int cells_all = 0;
  int cells_positive = 0;
};

struct RprPoint {
  std::string model;
  int n = 0;
  int m = 0;
  double mean_rpr_all = 0.0;
  double mean_rpr_positive = 0.0;
  int cells_all = 0;
  int cells_positive = 0;
};

struct BestCell {
  std::string task, model;
  int n = 0, size = 0;
  double best_accuracy = 0.0;
  int best_m = 0;
};

struct Summary {
  std::vector<DropSummary> drops;
  std::vector<RprPoint> rpr_points;
  std::vector<BestCell> best_cells;
  // (task, n) -> true when any model shows positive transfer at either size.
  std::map<std::pair<std::string, int>, bool> task_positive;
  // (task, model, n, size) -> predicate at cell granularity.
  std::map<std::tuple<std::string, std::string, int, int>, bool> cell_positive;
};

Summary aggregate(std::span<const RunRecord> records,
                  const AggregateOptions& opts = {});

void write_records_csv(const std::string& path,
                       std::span<const RunRecord> records);
void write_summary_report(const std::string& path, const Summary& summary);

}  // namespace aqcnn
