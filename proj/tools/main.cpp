#include <cstdlib>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"
#include "aqcnn/harness.hpp"
#include "aqcnn/synth.hpp"

namespace {
constexpr int kExitMissingData = 2;
constexpr int kExitBadFlags = 64;

std::string env_data_dir(const std::string& fallback) {
  const char* env = std::getenv("AQCNN_DATA_DIR");
  return env ? env : fallback;
}

int run_selftest() {
  using namespace aqcnn;
  int failures = 0;
  auto check = [&failures](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << '\n';
    if (!ok) ++failures;
  };

  // Parameter-count table.
  const int expected[2][3] = {{45, 51, 63}, {60, 68, 84}};
  bool counts_ok = true;
  for (int n : {3, 4}) {
    int i = 0;
    for (ModelVariant v : {ModelVariant::N, ModelVariant::Z, ModelVariant::G}) {
      counts_ok = counts_ok &&
                  build_model(v, n).total_params == expected[n - 3][i];
      ++i;
    }
  }
  counts_ok = counts_ok && build_ccnn('A', 3).total_params == 49 &&
              build_ccnn('A', 4).total_params == 185 &&
              build_ccnn('B', 3).total_params == 11901 &&
              build_ccnn('B', 4).total_params == 22001;
  check("parameter counts", counts_ok);

  // Ansatz unitarity.
  std::mt19937_64 rng(7);
  auto uni = [&rng]() {
    return 2.0 * std::numbers::pi *
           (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  bool unitary_ok = true;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> t15(15), t2(2), t6(6);
    for (double& x : t15) x = uni();
    for (double& x : t2) x = uni();
    for (double& x : t6) x = uni();
    unitary_ok = unitary_ok && is_unitary(conv_ansatz(t15)) &&
                 is_unitary(zx_pooling(t2)) && is_unitary(gen_pooling(t6));
  }
  check("ansatz unitarity", unitary_ok);

  // Parameter-shift gradient vs central finite differences on a reduced
  // model.
  bool grad_ok = true;
  {
    const ModelSpec spec = detail::build_model_unchecked(ModelVariant::G, 2);
    std::vector<double> params(static_cast<std::size_t>(spec.total_params));
    for (double& p : params) p = uni();
    std::vector<TrainSample> batch(2);
    for (TrainSample& s : batch) {
      s.features.resize(static_cast<std::size_t>(spec.num_qubits));
      for (double& f : s.features) f = uni() / 2.0;
      s.label = 1;
      s.target = class_code(1, 2, spec.num_qubits - 1);
    }
    const FreezePlan all = make_freeze_plan(spec, spec.n_layers);
    const std::vector<double> grad = gradients(spec, params, batch, all);
    const double h = 1e-5;
    for (std::size_t j = 0; j < params.size(); ++j) {
      std::vector<double> pp = params, pm = params;
      pp[j] += h;
      pm[j] -= h;
      const double fd =
          (batch_loss(spec, pp, batch) - batch_loss(spec, pm, batch)) /
          (2 * h);
      if (std::abs(grad[j] - fd) > 1e-6 * std::max(1.0, std::abs(fd))) {
        grad_ok = false;
      }
    }
  }
  check("parameter-shift gradients", grad_ok);

  // Readout rotation maps the hyperplane normal to +z.
  bool rot_ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    std::array<double, 3> w{uni() - std::numbers::pi, uni() - std::numbers::pi,
                            uni() - std::numbers::pi};
    const double nw = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    if (nw < 1e-6) continue;
    const Unitary2 u = hyperplane_to_rotation(w);
    const BlochVector r = rotate_bloch(
        u, BlochVector{w[0] / nw, w[1] / nw, w[2] / nw});
    if (std::abs(r.x) > 1e-8 || std::abs(r.y) > 1e-8 ||
        std::abs(r.z - 1.0) > 1e-8) {
      rot_ok = false;
    }
  }
  check("hyperplane alignment rotation", rot_ok);

  return failures == 0 ? 0 : 1;
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AQCNN quantum-to-quantum transfer learning harness"};
  app.require_subcommand(1);

  std::string data_dir = env_data_dir("data");
  std::string work_dir = "runs";
  app.add_option("--data-dir", data_dir, "dataset directory");
  app.add_option("--work-dir", work_dir, "results/cache directory");

  // synth
  auto* synth = app.add_subcommand(
      "synth", "generate deterministic synthetic MNIST-style IDX files");
  int per_class_train = 2000, per_class_test = 200;
  std::uint64_t synth_seed = 20240901;
  synth->add_option("--per-class-train", per_class_train);
  synth->add_option("--per-class-test", per_class_test);
  synth->add_option("--seed", synth_seed);

  // prepare
  auto* prepare = app.add_subcommand(
      "prepare", "build reduced-feature caches from IDX files");
  std::vector<std::string> tasks;
  std::vector<int> ns{3, 4};
  int source_size = 12000, test_size = 400;
  prepare->add_option("--tasks", tasks, "task ids (default: all)");
  prepare->add_option("--ns", ns, "layer counts");
  prepare->add_option("--source-size", source_size);
  prepare->add_option("--test-size", test_size);

  // train (source pretraining for one cell)
  auto* train = app.add_subcommand("train", "pretrain one source model");
  std::string task_id = "tl2", model = "qcnn-g";
  int n = 3, m = 0, target_size = 40;
  std::uint64_t seed = 1;
  int epochs_large = -1, epochs_small = -1;
  train->add_option("--task", task_id)->required();
  train->add_option("--model", model)->required();
  train->add_option("--n", n);
  train->add_option("--seed", seed);
  train->add_option("--source-size", source_size);
  train->add_option("--epochs", epochs_large);

  // transfer (one cell)
  auto* transfer = app.add_subcommand("transfer", "run one transfer cell");
  bool as_json = false;
  transfer->add_option("--task", task_id)->required();
  transfer->add_option("--model", model)->required();
  transfer->add_option("--n", n);
  transfer->add_option("--m", m)->required();
  transfer->add_option("--target-size", target_size);
  transfer->add_option("--seed", seed);
  transfer->add_option("--source-size", source_size);
  transfer->add_option("--test-size", test_size);
  transfer->add_option("--epochs-large", epochs_large);
  transfer->add_option("--epochs-small", epochs_small);
  transfer->add_flag("--json", as_json, "emit the RunRecord as one JSON line");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of cells");
  std::string config_path;
  int workers = 1;
  sweep_cmd->add_option("--config", config_path, "JSON sweep config")
      ->required();
  sweep_cmd->add_option("--workers", workers);

  // report
  auto* report_cmd = app.add_subcommand("report", "emit CSV/summary reports");
  std::string out_dir = "reports";
  report_cmd->add_option("--out", out_dir);

  // selftest
  app.add_subcommand("selftest", "run built-in consistency checks");

  CLI11_PARSE(app, argc, argv);

  aqcnn::HarnessConfig hc = aqcnn::default_harness_config();
  hc.data_dir = data_dir;
  hc.work_dir = work_dir;
  hc.source_size = source_size;
  hc.test_size = test_size;
  if (epochs_large > 0) hc.train_large.epochs = epochs_large;
  if (epochs_small > 0) hc.train_small.epochs = epochs_small;

  try {
    if (app.got_subcommand("synth")) {
      std::filesystem::create_directories(data_dir + "/mnist");
      std::filesystem::create_directories(data_dir + "/fashion");
      aqcnn::write_synthetic_idx(data_dir + "/mnist", "train",
                                 aqcnn::SynthKind::Digits, per_class_train,
                                 synth_seed);
      aqcnn::write_synthetic_idx(data_dir + "/mnist", "t10k",
                                 aqcnn::SynthKind::Digits, per_class_test,
                                 synth_seed ^ 0xdeadbeefULL);
      aqcnn::write_synthetic_idx(data_dir + "/fashion", "train",
                                 aqcnn::SynthKind::Fashion, per_class_train,
                                 synth_seed + 1);
      aqcnn::write_synthetic_idx(data_dir + "/fashion", "t10k",
                                 aqcnn::SynthKind::Fashion, per_class_test,
                                 synth_seed ^ 0xfeedbeefULL);
      std::cout << "wrote synthetic IDX files under " << data_dir << '\n';
      return 0;
    }
    if (app.got_subcommand("prepare")) {
      if (tasks.empty()) {
        for (const aqcnn::TaskSpec& t : aqcnn::all_tasks()) {
          tasks.push_back(t.id);
        }
      }
      aqcnn::prepare_all(hc, tasks, ns);
      std::cout << "prepared " << tasks.size() * ns.size()
                << " task caches under " << data_dir << "/prepared\n";
      return 0;
    }
    if (app.got_subcommand("train")) {
      aqcnn::pretrain_source(aqcnn::task_by_id(task_id), model, n, seed, hc);
      std::cout << "pretrained " << model << " on " << task_id << " (n=" << n
                << ", seed=" << seed << ")\n";
      return 0;
    }
    if (app.got_subcommand("transfer")) {
      if (m > n) {
        std::cerr << "invalid flags: m=" << m << " exceeds n=" << n << '\n';
        return kExitBadFlags;
      }
      const aqcnn::RunRecord rec = aqcnn::run_transfer(
          aqcnn::task_by_id(task_id), model, n, m, target_size, seed, hc);
      if (as_json) {
        std::cout << rec.to_json() << '\n';
      } else {
        std::cout << "task=" << rec.task << " model=" << rec.model
                  << " n=" << rec.n << " m=" << rec.m
                  << " size=" << rec.target_size << " seed=" << rec.seed
                  << " accuracy=" << rec.accuracy << " loss=" << rec.final_loss
                  << " seconds=" << rec.seconds << '\n';
      }
      return 0;
    }
    if (app.got_subcommand("sweep")) {
      // Config file takes precedence over flags, flags over defaults.
      aqcnn::SweepConfig cfg = aqcnn::SweepConfig::from_json_file(config_path);
      if (cfg.harness.data_dir.empty()) cfg.harness.data_dir = data_dir;
      if (cfg.harness.work_dir.empty()) cfg.harness.work_dir = work_dir;
      if (cfg.workers <= 1) cfg.workers = workers;
      const aqcnn::SweepResult result = aqcnn::sweep(cfg);
      std::cout << result.records.size() << " records, " << result.failures
                << " failures\n";
      return result.failures == 0 ? 0 : 1;
    }
    if (app.got_subcommand("report")) {
      const std::vector<aqcnn::RunRecord> records =
          aqcnn::load_records(work_dir);
      aqcnn::report(records, out_dir);
      std::cout << "wrote reports for " << records.size() << " records to "
                << out_dir << '\n';
      return 0;
    }
    if (app.got_subcommand("selftest")) {
      return run_selftest();
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << '\n';
    if (what.find("missing IDX") != std::string::npos ||
        what.find("cannot open") != std::string::npos) {
      return kExitMissingData;
    }
    return 1;
  }
  return 0;
}
