#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aqcnn/train.hpp"

namespace aqcnn {

// Fully-connected baseline matched to the published parameter budgets:
//   CCNN-A: 8-4-2-1 (49) and 16-8-4-2-1 (185)
//   CCNN-B: 8-99-109-1 (11901) and 16-64-124-102-1 (22001)
// tanh hidden activations, sigmoid output. Layers are partitioned into n
// freezable groups from input to output, mirroring the quantum m-sweep.
struct CcnnSpec {
  char variant = 'A';
  int n = 3;
  std::vector<int> sizes;        // including input and output widths
  int total_params = 0;
  std::vector<int> param_group;  // group id per flat parameter
  int budget = 0;                // published target count
};

CcnnSpec build_ccnn(char variant, int n);

std::vector<double> ccnn_init(const CcnnSpec& spec, std::uint64_t seed);

// Group-level freeze mask expanded to a per-parameter mask; m retrained
// groups means the last m groups are trainable.
FreezePlan ccnn_freeze_plan(const CcnnSpec& spec, int m);

double ccnn_forward(const CcnnSpec& spec, std::span<const double> weights,
                    std::span<const double> features);

double ccnn_loss(const CcnnSpec& spec, std::span<const double> weights,
                 std::span<const TrainSample> batch);

// Backpropagation gradient of the mean base-2 BCE over the batch.
std::vector<double> ccnn_gradients(const CcnnSpec& spec,
                                   std::span<const double> weights,
                                   std::span<const TrainSample> batch,
                                   const FreezePlan& freeze);

FitResult ccnn_fit(const CcnnSpec& spec, std::vector<double> init_weights,
                   std::span<const TrainSample> dataset, const TrainConfig& cfg,
                   const FreezePlan& freeze);

int ccnn_classify(const CcnnSpec& spec, std::span<const double> weights,
                  std::span<const double> features);

}  // namespace aqcnn
