#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aqcnn/harness.hpp"
#include "aqcnn/synth.hpp"

namespace py = pybind11;
using namespace aqcnn;

namespace {

std::vector<TrainSample> make_samples(
    const std::vector<std::vector<double>>& features,
    const std::vector<int>& labels, int num_classes, int T) {
  if (features.size() != labels.size()) {
    throw std::invalid_argument("features/labels length mismatch");
  }
  std::vector<TrainSample> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    out[i].features = features[i];
    out[i].label = labels[i];
    out[i].target = class_code(labels[i], num_classes, T);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ansatz-based QCNN simulator and transfer-learning harness";

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_property_readonly("variant",
                             [](const ModelSpec& s) {
                               return variant_name(s.variant);
                             })
      .def_readonly("n_layers", &ModelSpec::n_layers)
      .def_readonly("num_qubits", &ModelSpec::num_qubits)
      .def_readonly("survivor", &ModelSpec::survivor)
      .def_readonly("measured", &ModelSpec::measured)
      .def_readonly("total_params", &ModelSpec::total_params)
      .def_readonly("layer_offsets", &ModelSpec::layer_offsets)
      .def_readonly("layer_widths", &ModelSpec::layer_widths)
      .def("to_json", &ModelSpec::to_json);

  m.def("build_model",
        [](const std::string& variant, int n) {
          return build_model(variant_from_name(variant), n);
        },
        py::arg("variant"), py::arg("n"));

  m.def("measured_probs",
        [](const ModelSpec& spec, const std::vector<double>& params,
           const std::vector<double>& features) {
          return measured_probs(spec, params, features);
        },
        py::arg("spec"), py::arg("params"), py::arg("features"));

  m.def("statevector",
        [](const ModelSpec& spec, const std::vector<double>& params,
           const std::vector<double>& features) {
          return forward(spec, params, features).amps;
        },
        py::arg("spec"), py::arg("params"), py::arg("features"));

  m.def("survivor_bloch",
        [](const ModelSpec& spec, const std::vector<double>& params,
           const std::vector<double>& features) {
          const StateVector st = forward(spec, params, features);
          const BlochVector b = bloch_vector(st, spec.survivor);
          return std::make_tuple(b.x, b.y, b.z);
        },
        py::arg("spec"), py::arg("params"), py::arg("features"));

  m.def("batch_loss",
        [](const ModelSpec& spec, const std::vector<double>& params,
           const std::vector<std::vector<double>>& features,
           const std::vector<int>& labels, int num_classes) {
          return batch_loss(spec, params,
                            make_samples(features, labels, num_classes,
                                         spec.num_qubits - 1));
        },
        py::arg("spec"), py::arg("params"), py::arg("features"),
        py::arg("labels"), py::arg("num_classes") = 2);

  m.def("gradients",
        [](const ModelSpec& spec, const std::vector<double>& params,
           const std::vector<std::vector<double>>& features,
           const std::vector<int>& labels, int m, int num_classes) {
          return gradients(spec, params,
                           make_samples(features, labels, num_classes,
                                        spec.num_qubits - 1),
                           make_freeze_plan(spec, m));
        },
        py::arg("spec"), py::arg("params"), py::arg("features"),
        py::arg("labels"), py::arg("m"), py::arg("num_classes") = 2);

  m.def("fit",
        [](const ModelSpec& spec, std::vector<double> init,
           const std::vector<std::vector<double>>& features,
           const std::vector<int>& labels, int m, int epochs, double lr,
           std::uint64_t seed, int num_classes) {
          TrainConfig cfg;
          cfg.epochs = epochs;
          cfg.learning_rate = lr;
          cfg.seed = seed;
          const FitResult r =
              fit(spec, std::move(init),
                  make_samples(features, labels, num_classes,
                               spec.num_qubits - 1),
                  cfg, make_freeze_plan(spec, m));
          return std::make_tuple(r.params, r.loss_history);
        },
        py::arg("spec"), py::arg("init"), py::arg("features"),
        py::arg("labels"), py::arg("m"), py::arg("epochs") = 30,
        py::arg("lr") = 0.01, py::arg("seed") = 0, py::arg("num_classes") = 2);

  m.def("ccnn_total_params",
        [](const std::string& variant, int n) {
          return build_ccnn(variant == "ccnn-b" || variant == "B" ? 'B' : 'A',
                            n)
              .total_params;
        },
        py::arg("variant"), py::arg("n"));

  m.def("rpr", &rpr, py::arg("acc_small"), py::arg("acc_large"));
  m.def("accuracy_drop", &accuracy_drop, py::arg("acc_large"),
        py::arg("acc_small"));
  m.def("positive_transfer",
        [](const std::map<int, double>& acc_by_m, int n) {
          return positive_transfer(acc_by_m, n);
        },
        py::arg("acc_by_m"), py::arg("n"));

  m.def("write_synthetic_idx",
        [](const std::string& dir, const std::string& prefix,
           const std::string& kind, int per_class, std::uint64_t seed) {
          write_synthetic_idx(dir, prefix,
                              kind == "fashion" ? SynthKind::Fashion
                                                : SynthKind::Digits,
                              per_class, seed);
        },
        py::arg("dir"), py::arg("prefix"), py::arg("kind"),
        py::arg("per_class"), py::arg("seed"));

  m.def("run_transfer",
        [](const std::string& task, const std::string& model, int n, int m,
           int target_size, std::uint64_t seed, const std::string& data_dir,
           const std::string& work_dir, int source_size, int test_size,
           int epochs_large, int epochs_small) {
          HarnessConfig cfg = default_harness_config();
          cfg.data_dir = data_dir;
          cfg.work_dir = work_dir;
          cfg.source_size = source_size;
          cfg.test_size = test_size;
          cfg.train_large.epochs = epochs_large;
          cfg.train_small.epochs = epochs_small;
          const RunRecord rec =
              run_transfer(task_by_id(task), model, n, m, target_size, seed,
                           cfg);
          return rec.to_json();
        },
        py::arg("task"), py::arg("model"), py::arg("n"), py::arg("m"),
        py::arg("target_size"), py::arg("seed"), py::arg("data_dir"),
        py::arg("work_dir"), py::arg("source_size") = 200,
        py::arg("test_size") = 100, py::arg("epochs_large") = 5,
        py::arg("epochs_small") = 20);
}
