#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aqcnn/statevec.hpp"

namespace aqcnn {

struct RawDataset {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<std::uint8_t>> images;
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }
};

// Reads a big-endian IDX image/label file pair; gzip-compressed files are
// inflated transparently.
RawDataset load_idx(const std::string& images_path,
                    const std::string& labels_path);

std::vector<std::vector<std::uint8_t>> load_idx_images(
    const std::string& path, int* rows = nullptr, int* cols = nullptr);
std::vector<int> load_idx_labels(const std::string& path);

RawDataset select_classes(const RawDataset& ds, const std::vector<int>& classes,
                          const std::map<int, int>& relabel);

struct Sample {
  std::vector<double> features;  // in [0, pi]
  int label = 0;
};

// PCA projection fitted on a training set, with per-feature min-max rescale
// to [0, pi] frozen from the same set.
struct Reducer {
  std::vector<double> mean;                 // pixel means
  std::vector<std::vector<double>> basis;   // orthonormal component rows
  std::vector<double> feat_min, feat_max;   // training-set projection range
};

Reducer fit_reducer(const RawDataset& train, int dim);
std::vector<Sample> reduce(const Reducer& r, const RawDataset& ds);

StateVector angle_encode(const Sample& s);

// Little-endian binary container for reduced datasets.
void save_samples(const std::string& path, const std::vector<Sample>& samples);
std::vector<Sample> load_samples(const std::string& path);

void save_reducer(const std::string& path, const Reducer& r);
Reducer load_reducer(const std::string& path);

}  // namespace aqcnn
