#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "aqcnn/metrics.hpp"
#include "aqcnn/train.hpp"
#include "doctest.h"

using namespace aqcnn;

namespace {

RunRecord make_record(const std::string& task, const std::string& model, int n,
                      int m, int size, std::uint64_t seed, double acc) {
  RunRecord r;
  r.task = task;
  r.model = model;
  r.n = n;
  r.m = m;
  r.target_size = size;
  r.seed = seed;
  r.accuracy = acc;
  r.final_loss = 0.1;
  r.seconds = 1.0;
  r.from_scratch = (m == n);
  return r;
}

}  // namespace

TEST_CASE("accuracy counts matches over predictions") {
  const std::vector<int> pred{1, 0, 1, 1};
  const std::vector<int> labels{1, 0, 0, 1};
  CHECK(accuracy(pred, labels) == doctest::Approx(0.75));
  CHECK_THROWS_AS(accuracy(pred, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("published relative-performance ratio value") {
  // [DERIVED] 0.9675 / 0.9694 = 0.99804, the small-over-large accuracy
  // ratio quoted for the three-layer shared-pooling transfer table.
  CHECK(rpr(0.9675, 0.9694) == doctest::Approx(0.99804).epsilon(1e-5));
  CHECK_THROWS_AS(rpr(0.5, 0.0), std::domain_error);
}

TEST_CASE("published accuracy-drop value") {
  // [DERIVED] 0.9824 - 0.8620 = 0.1204 for the large classical baseline.
  CHECK(accuracy_drop(0.9824, 0.8620) == doctest::Approx(0.1204).epsilon(1e-12));
}

TEST_CASE("loss example from probability of the target bit") {
  // [DERIVED] p0 = (0.8, 0.6) with label 1 on both measured qubits gives
  // -(log2 0.8 + log2 0.6)/2 = 0.52945.
  TargetBits t;
  t.bits = {1, 1};
  CHECK(bce_loss(std::vector<double>{0.8, 0.6}, t) ==
        doctest::Approx(0.52945).epsilon(1e-4));
}

TEST_CASE("positive_transfer requires a strict win over from-scratch") {
  CHECK(positive_transfer({{0, 0.7}, {1, 0.9}, {3, 0.85}}, 3));
  CHECK_FALSE(positive_transfer({{1, 0.85}, {3, 0.85}}, 3));  // tie is not a win
  CHECK_FALSE(positive_transfer({{1, 0.8}, {3, 0.9}}, 3));
  CHECK_THROWS_AS(positive_transfer({{1, 0.8}}, 3), std::invalid_argument);
  CHECK_THROWS_AS(positive_transfer({{3, 0.8}}, 3), std::invalid_argument);
}

TEST_CASE("RunRecord JSON round-trips") {
  RunRecord r = make_record("tl2", "qcnn-g", 3, 1, 40, 7, 0.925);
  r.config = R"({"epochs":30})";
  r.readout = R"({"w":[0,0,1]})";
  const RunRecord back = RunRecord::from_json(r.to_json());
  CHECK(back.task == r.task);
  CHECK(back.model == r.model);
  CHECK(back.n == r.n);
  CHECK(back.m == r.m);
  CHECK(back.target_size == r.target_size);
  CHECK(back.seed == r.seed);
  CHECK(back.accuracy == r.accuracy);
  CHECK(back.from_scratch == r.from_scratch);
  CHECK(back.config == r.config);
  CHECK_THROWS(RunRecord::from_json("not json"));
}

TEST_CASE("aggregate averages seeds and flags positive transfer") {
  std::vector<RunRecord> records;
  // qcnn-g on tl2: m=1 beats m=3 at both sizes (positive transfer).
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    records.push_back(make_record("tl2", "qcnn-g", 3, 1, 40, seed,
                                  0.90 + 0.01 * static_cast<double>(seed)));
    records.push_back(make_record("tl2", "qcnn-g", 3, 3, 40, seed, 0.80));
    records.push_back(make_record("tl2", "qcnn-g", 3, 1, 2000, seed, 0.95));
    records.push_back(make_record("tl2", "qcnn-g", 3, 3, 2000, seed, 0.90));
  }
  // ccnn-b on tl2: from-scratch wins (no positive transfer), bigger drop.
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    records.push_back(make_record("tl2", "ccnn-b", 3, 1, 40, seed, 0.70));
    records.push_back(make_record("tl2", "ccnn-b", 3, 3, 40, seed, 0.75));
    records.push_back(make_record("tl2", "ccnn-b", 3, 1, 2000, seed, 0.93));
    records.push_back(make_record("tl2", "ccnn-b", 3, 3, 2000, seed, 0.96));
  }
  const Summary s = aggregate(records);
  REQUIRE(!s.best_cells.empty());
  // Best qcnn-g cell at size 40 is m=1 with the seed-mean 0.92.
  bool found = false;
  for (const BestCell& c : s.best_cells) {
    if (c.model == "qcnn-g" && c.size == 40) {
      CHECK(c.best_m == 1);
      CHECK(c.best_accuracy == doctest::Approx(0.92));
      found = true;
    }
  }
  CHECK(found);
  CHECK(s.task_positive.at({"tl2", 3}));
  CHECK(s.cell_positive.at({"tl2", "qcnn-g", 3, 40}));
  CHECK_FALSE(s.cell_positive.at({"tl2", "ccnn-b", 3, 40}));
  // Mean |large - small| over the m grid: qcnn-g (0.03 + 0.10)/2 = 0.065,
  // ccnn-b (0.23 + 0.21)/2 = 0.22.
  double qcnn_drop = -1.0, ccnn_drop = -1.0;
  for (const DropSummary& d : s.drops) {
    if (d.model == "qcnn-g") qcnn_drop = d.mean_abs_drop_all;
    if (d.model == "ccnn-b") ccnn_drop = d.mean_abs_drop_all;
  }
  CHECK(qcnn_drop == doctest::Approx(0.065));
  CHECK(ccnn_drop == doctest::Approx(0.22));
  CHECK(qcnn_drop < ccnn_drop);
}

TEST_CASE("CSV and summary files are written") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("aqcnn_metrics_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<RunRecord> records{
      make_record("tl1", "qcnn-n", 3, 0, 40, 1, 0.8),
      make_record("tl1", "qcnn-n", 3, 3, 40, 1, 0.7),
      make_record("tl1", "qcnn-n", 3, 0, 2000, 1, 0.9),
      make_record("tl1", "qcnn-n", 3, 3, 2000, 1, 0.85),
  };
  const std::string csv = (dir / "records.csv").string();
  write_records_csv(csv, records);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "model,n,m,task,size,seed,accuracy");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 4);
  write_summary_report((dir / "summary.json").string(), aggregate(records));
  CHECK(fs::file_size(dir / "summary.json") > 10);
  fs::remove_all(dir);
}
