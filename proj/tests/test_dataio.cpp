#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "aqcnn/dataio.hpp"
#include "doctest.h"
#include "zlib.h"

using namespace aqcnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("aqcnn_dataio_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_idx_pair(const fs::path& images, const fs::path& labels,
                    const std::vector<std::vector<std::uint8_t>>& imgs,
                    const std::vector<int>& labs, int rows, int cols) {
  std::ofstream im(images, std::ios::binary);
  put_be32(im, 0x803);
  put_be32(im, static_cast<std::uint32_t>(imgs.size()));
  put_be32(im, static_cast<std::uint32_t>(rows));
  put_be32(im, static_cast<std::uint32_t>(cols));
  for (const auto& img : imgs) {
    im.write(reinterpret_cast<const char*>(img.data()),
             static_cast<std::streamsize>(img.size()));
  }
  std::ofstream lb(labels, std::ios::binary);
  put_be32(lb, 0x801);
  put_be32(lb, static_cast<std::uint32_t>(labs.size()));
  for (int l : labs) {
    const char c = static_cast<char>(l);
    lb.write(&c, 1);
  }
}

void gzip_file(const fs::path& src, const fs::path& dst) {
  std::ifstream in(src, std::ios::binary);
  std::vector<char> data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  gzFile out = gzopen(dst.c_str(), "wb");
  REQUIRE(out != nullptr);
  gzwrite(out, data.data(), static_cast<unsigned>(data.size()));
  gzclose(out);
}

RawDataset tiny_dataset() {
  RawDataset ds;
  ds.rows = 2;
  ds.cols = 2;
  ds.images = {{0, 255, 0, 255}, {255, 0, 255, 0}, {10, 20, 30, 40},
               {200, 100, 50, 25}};
  ds.labels = {0, 1, 0, 1};
  return ds;
}

}  // namespace

TEST_CASE("load_idx round-trips raw and gzipped files") {
  TempDir tmp;
  const RawDataset ds = tiny_dataset();
  const fs::path im = tmp.path / "train-images-idx3-ubyte";
  const fs::path lb = tmp.path / "train-labels-idx1-ubyte";
  write_idx_pair(im, lb, ds.images, ds.labels, ds.rows, ds.cols);

  const RawDataset raw = load_idx(im.string(), lb.string());
  CHECK(raw.rows == 2);
  CHECK(raw.cols == 2);
  CHECK(raw.images == ds.images);
  CHECK(raw.labels == ds.labels);

  gzip_file(im, tmp.path / "im.gz");
  gzip_file(lb, tmp.path / "lb.gz");
  const RawDataset gz =
      load_idx((tmp.path / "im.gz").string(), (tmp.path / "lb.gz").string());
  CHECK(gz.images == ds.images);
  CHECK(gz.labels == ds.labels);
}

TEST_CASE("load_idx rejects bad magic, truncation and mismatched counts") {
  TempDir tmp;
  const RawDataset ds = tiny_dataset();
  const fs::path im = tmp.path / "im";
  const fs::path lb = tmp.path / "lb";
  write_idx_pair(im, lb, ds.images, ds.labels, ds.rows, ds.cols);

  // Corrupt the magic number.
  {
    std::fstream f(im, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(3);
    f.put(0x04);
  }
  CHECK_THROWS_AS(load_idx(im.string(), lb.string()), FormatError);

  // Restore, then truncate the payload.
  write_idx_pair(im, lb, ds.images, ds.labels, ds.rows, ds.cols);
  fs::resize_file(im, fs::file_size(im) - 3);
  CHECK_THROWS_AS(load_idx(im.string(), lb.string()), FormatError);

  // Mismatched image/label counts.
  write_idx_pair(im, lb, ds.images, {0, 1, 0}, ds.rows, ds.cols);
  CHECK_THROWS_AS(load_idx(im.string(), lb.string()), FormatError);

  CHECK_THROWS(load_idx((tmp.path / "missing").string(), lb.string()));
}

TEST_CASE("FormatError carries a byte offset") {
  TempDir tmp;
  std::ofstream bad(tmp.path / "bad", std::ios::binary);
  bad << "nope";
  bad.close();
  try {
    load_idx_labels((tmp.path / "bad").string());
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset == 0);
  }
}

TEST_CASE("select_classes filters and relabels") {
  RawDataset ds = tiny_dataset();
  ds.labels = {3, 7, 3, 7};
  const RawDataset sel = select_classes(ds, {3, 7}, {{3, 0}, {7, 1}});
  CHECK(sel.size() == 4);
  CHECK(sel.labels == std::vector<int>{0, 1, 0, 1});
  const RawDataset only3 = select_classes(ds, {3}, {{3, 0}});
  CHECK(only3.size() == 2);
  CHECK_THROWS_AS(select_classes(ds, {11}, {}), std::invalid_argument);
}

TEST_CASE("fit_reducer finds the dominant direction and rescales to [0, pi]") {
  // Points vary along one axis in pixel space; the first principal
  // component must capture that direction and map the range to [0, pi].
  RawDataset ds;
  ds.rows = 1;
  ds.cols = 4;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const std::uint8_t v = static_cast<std::uint8_t>(rng() % 256);
    ds.images.push_back({v, 0, 0, 0});
    ds.labels.push_back(0);
  }
  const Reducer r = fit_reducer(ds, 2);
  REQUIRE(r.basis.size() == 2);
  // [DERIVED] PC1 is +-e0 with the sign fixed positive on the largest entry.
  CHECK(std::abs(r.basis[0][0]) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.basis[0][0] > 0.0);
  // Orthonormality.
  double dot = 0.0, n1 = 0.0;
  for (int k = 0; k < 4; ++k) {
    dot += r.basis[0][static_cast<std::size_t>(k)] *
           r.basis[1][static_cast<std::size_t>(k)];
    n1 += r.basis[1][static_cast<std::size_t>(k)] *
          r.basis[1][static_cast<std::size_t>(k)];
  }
  CHECK(std::abs(dot) < 1e-9);
  CHECK(n1 == doctest::Approx(1.0).epsilon(1e-9));

  const std::vector<Sample> feats = reduce(r, ds);
  double lo = 1e9, hi = -1e9;
  for (const Sample& s : feats) {
    for (double f : s.features) {
      CHECK(f >= 0.0);
      CHECK(f <= std::numbers::pi + 1e-12);
      lo = std::min(lo, s.features[0]);
      hi = std::max(hi, s.features[0]);
    }
  }
  CHECK(lo == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(hi == doctest::Approx(std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("reduce clamps out-of-range projections on reuse") {
  RawDataset train;
  train.rows = 1;
  train.cols = 2;
  train.images = {{10, 0}, {90, 0}, {50, 0}};
  train.labels = {0, 0, 0};
  const Reducer r = fit_reducer(train, 1);
  RawDataset wild = train;
  wild.images = {{255, 0}, {0, 0}};
  const std::vector<Sample> out = reduce(r, wild);
  for (const Sample& s : out) {
    CHECK(s.features[0] >= 0.0);
    CHECK(s.features[0] <= std::numbers::pi);
  }
}

TEST_CASE("angle_encode products single-qubit Ry rotations") {
  Sample s;
  s.features = {std::numbers::pi, 0.0, std::numbers::pi / 2};
  const StateVector st = angle_encode(s);
  CHECK(st.num_qubits == 3);
  // [DERIVED] Ry(pi)|0> on qubit 0, identity on 1, equal split on 2:
  // amplitude lands on |100> and |101> with weight 1/sqrt2.
  CHECK(std::abs(st.amps[4]) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(st.amps[5]) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  Sample bad;
  bad.features = {4.0};
  CHECK_THROWS_AS(angle_encode(bad), std::invalid_argument);
}

TEST_CASE("sample and reducer containers round-trip bitwise") {
  TempDir tmp;
  std::vector<Sample> samples(3);
  std::mt19937_64 rng(9);
  for (Sample& s : samples) {
    s.features.resize(4);
    for (double& f : s.features) {
      f = std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    s.label = static_cast<int>(rng() % 10);
  }
  const fs::path p = tmp.path / "samples.bin";
  save_samples(p.string(), samples);
  const std::vector<Sample> back = load_samples(p.string());
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].features == samples[i].features);
    CHECK(back[i].label == samples[i].label);
  }

  RawDataset ds = tiny_dataset();
  const Reducer r = fit_reducer(ds, 2);
  const fs::path rp = tmp.path / "reducer.bin";
  save_reducer(rp.string(), r);
  const Reducer rb = load_reducer(rp.string());
  CHECK(rb.mean == r.mean);
  CHECK(rb.basis == r.basis);
  CHECK(rb.feat_min == r.feat_min);
  CHECK(rb.feat_max == r.feat_max);

  // Corrupted magic is rejected.
  std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
  f.seekp(0);
  f.put('X');
  f.close();
  CHECK_THROWS_AS(load_samples(p.string()), FormatError);
}
