#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <vector>

#include "aqcnn/dataio.hpp"
#include "aqcnn/synth.hpp"
#include "doctest.h"

using namespace aqcnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    path = fs::temp_directory_path() /
           (std::string("aqcnn_synth_") + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("synthetic IDX files parse and have balanced labels") {
  TempDir tmp("parse");
  write_synthetic_idx(tmp.path.string(), "train", SynthKind::Digits, 5, 77);
  const RawDataset ds =
      load_idx((tmp.path / "train-images-idx3-ubyte").string(),
               (tmp.path / "train-labels-idx1-ubyte").string());
  CHECK(ds.size() == 50);
  CHECK(ds.rows == 28);
  CHECK(ds.cols == 28);
  std::vector<int> counts(10, 0);
  for (int l : ds.labels) {
    REQUIRE(l >= 0);
    REQUIRE(l <= 9);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c : counts) CHECK(c == 5);
  // Images are non-trivial: some ink, some background.
  for (const auto& img : ds.images) {
    int ink = 0;
    for (std::uint8_t px : img) {
      if (px > 128) ++ink;
    }
    CHECK(ink > 10);
    CHECK(ink < 500);
  }
}

TEST_CASE("same seed reproduces files byte for byte") {
  TempDir a("rep_a"), b("rep_b");
  write_synthetic_idx(a.path.string(), "t", SynthKind::Fashion, 4, 123);
  write_synthetic_idx(b.path.string(), "t", SynthKind::Fashion, 4, 123);
  CHECK(slurp(a.path / "t-images-idx3-ubyte") ==
        slurp(b.path / "t-images-idx3-ubyte"));
  CHECK(slurp(a.path / "t-labels-idx1-ubyte") ==
        slurp(b.path / "t-labels-idx1-ubyte"));
}

TEST_CASE("different seeds and kinds give different pixels") {
  TempDir a("var_a"), b("var_b"), c("var_c");
  write_synthetic_idx(a.path.string(), "t", SynthKind::Digits, 3, 1);
  write_synthetic_idx(b.path.string(), "t", SynthKind::Digits, 3, 2);
  write_synthetic_idx(c.path.string(), "t", SynthKind::Fashion, 3, 1);
  const auto ia = slurp(a.path / "t-images-idx3-ubyte");
  CHECK(ia != slurp(b.path / "t-images-idx3-ubyte"));
  CHECK(ia != slurp(c.path / "t-images-idx3-ubyte"));
}

TEST_CASE("classes are visually distinct under the PCA pipeline") {
  // A reducer fitted on two synthetic classes must separate them enough
  // that nearest-class-mean classification clearly beats chance. This
  // guards against degenerate rendering (all-blank or identical glyphs).
  TempDir tmp("sep");
  write_synthetic_idx(tmp.path.string(), "train", SynthKind::Digits, 60, 9001);
  RawDataset ds = load_idx((tmp.path / "train-images-idx3-ubyte").string(),
                           (tmp.path / "train-labels-idx1-ubyte").string());
  const RawDataset pair = select_classes(ds, {1, 2}, {{1, 0}, {2, 1}});
  const Reducer r = fit_reducer(pair, 8);
  const std::vector<Sample> feats = reduce(r, pair);
  std::vector<double> mean0(8, 0.0), mean1(8, 0.0);
  int n0 = 0, n1 = 0;
  for (const Sample& s : feats) {
    auto& m = s.label == 0 ? mean0 : mean1;
    (s.label == 0 ? n0 : n1)++;
    for (std::size_t k = 0; k < 8; ++k) m[k] += s.features[k];
  }
  for (std::size_t k = 0; k < 8; ++k) {
    mean0[k] /= n0;
    mean1[k] /= n1;
  }
  int correct = 0;
  for (const Sample& s : feats) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      d0 += (s.features[k] - mean0[k]) * (s.features[k] - mean0[k]);
      d1 += (s.features[k] - mean1[k]) * (s.features[k] - mean1[k]);
    }
    if ((d0 < d1 ? 0 : 1) == s.label) ++correct;
  }
  CHECK(static_cast<double>(correct) / feats.size() > 0.9);
}
