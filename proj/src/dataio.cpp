#include "aqcnn/dataio.hpp"

#include <zlib.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace aqcnn {

namespace {
constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    throw std::runtime_error("zlib init failed");
  }
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::uint8_t buf[1 << 16];
  zs.next_in = const_cast<std::uint8_t*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int ret = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    ret = inflate(&zs, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("gzip stream corrupt", zs.total_in);
    }
    out.insert(out.end(), buf, buf + sizeof(buf) - zs.avail_out);
  } while (ret != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
  std::vector<std::uint8_t> data = read_file(path);
  if (data.size() >= 2 && data[0] == 0x1f && data[1] == 0x8b) {
    return gunzip(data);
  }
  return data;
}

std::uint32_t be32(const std::vector<std::uint8_t>& d, std::size_t off) {
  if (off + 4 > d.size()) {
    throw FormatError("truncated header", off);
  }
  return (std::uint32_t{d[off]} << 24) | (std::uint32_t{d[off + 1]} << 16) |
         (std::uint32_t{d[off + 2]} << 8) | std::uint32_t{d[off + 3]};
}
}  // namespace

std::vector<std::vector<std::uint8_t>> load_idx_images(const std::string& path,
                                                       int* rows_out,
                                                       int* cols_out) {
  const std::vector<std::uint8_t> d = read_maybe_gzip(path);
  if (be32(d, 0) != kImageMagic) {
    throw FormatError("bad IDX image magic in " + path, 0);
  }
  const std::uint32_t count = be32(d, 4);
  const std::uint32_t rows = be32(d, 8);
  const std::uint32_t cols = be32(d, 12);
  const std::size_t expected = 16 + std::size_t{count} * rows * cols;
  if (d.size() != expected) {
    throw FormatError("IDX image payload length " + std::to_string(d.size()) +
                          ", expected " + std::to_string(expected),
                      d.size());
  }
  std::vector<std::vector<std::uint8_t>> images(count);
  const std::size_t px = std::size_t{rows} * cols;
  for (std::uint32_t i = 0; i < count; ++i) {
    images[i].assign(d.begin() + 16 + static_cast<std::ptrdiff_t>(i * px),
                     d.begin() + 16 + static_cast<std::ptrdiff_t>((i + 1) * px));
  }
  if (rows_out) *rows_out = static_cast<int>(rows);
  if (cols_out) *cols_out = static_cast<int>(cols);
  return images;
}

std::vector<int> load_idx_labels(const std::string& path) {
  const std::vector<std::uint8_t> d = read_maybe_gzip(path);
  if (be32(d, 0) != kLabelMagic) {
    throw FormatError("bad IDX label magic in " + path, 0);
  }
  const std::uint32_t count = be32(d, 4);
  if (d.size() != 8 + std::size_t{count}) {
    throw FormatError("IDX label payload length " + std::to_string(d.size()) +
                          ", expected " + std::to_string(8 + count),
                      d.size());
  }
  std::vector<int> labels(count);
  for (std::uint32_t i = 0; i < count; ++i) labels[i] = d[8 + i];
  return labels;
}

RawDataset load_idx(const std::string& images_path,
                    const std::string& labels_path) {
  RawDataset ds;
  ds.images = load_idx_images(images_path, &ds.rows, &ds.cols);
  ds.labels = load_idx_labels(labels_path);
  if (ds.images.size() != ds.labels.size()) {
    throw FormatError("image count " + std::to_string(ds.images.size()) +
                          " != label count " + std::to_string(ds.labels.size()),
                      0);
  }
  return ds;
}

RawDataset select_classes(const RawDataset& ds, const std::vector<int>& classes,
                          const std::map<int, int>& relabel) {
  if (classes.empty()) {
    throw std::invalid_argument("class list must be nonempty");
  }
  for (int c : classes) {
    if (c < 0 || c > 9) {
      throw std::invalid_argument("unknown class " + std::to_string(c));
    }
  }
  RawDataset out;
  out.rows = ds.rows;
  out.cols = ds.cols;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int label = ds.labels[i];
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
      continue;
    }
    out.images.push_back(ds.images[i]);
    const auto it = relabel.find(label);
    out.labels.push_back(it == relabel.end() ? label : it->second);
  }
  return out;
}

Reducer fit_reducer(const RawDataset& train, int dim) {
  if (train.size() == 0) {
    throw std::invalid_argument("reducer needs a nonempty training set");
  }
  const int px = train.rows * train.cols;
  if (dim < 1 || dim > px) {
    throw std::invalid_argument("reduction dim out of range");
  }
  const std::size_t n = train.size();

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), px);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < px; ++j) {
      x(static_cast<Eigen::Index>(i), j) =
          static_cast<double>(train.images[i][static_cast<std::size_t>(j)]);
    }
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov =
      (x.transpose() * x) / static_cast<double>(n > 1 ? n - 1 : 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }

  Reducer r;
  r.mean.assign(mean.data(), mean.data() + px);
  // Eigenvalues ascend; take the top-dim columns, sign-fixed so the
  // largest-magnitude entry of each component is positive.
  for (int k = 0; k < dim; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(px - 1 - k);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    r.basis.emplace_back(v.data(), v.data() + px);
  }

  // Training-set projection range for the [0, pi] rescale.
  r.feat_min.assign(static_cast<std::size_t>(dim),
                    std::numeric_limits<double>::infinity());
  r.feat_max.assign(static_cast<std::size_t>(dim),
                    -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) {
      double proj = 0.0;
      for (int j = 0; j < px; ++j) {
        proj += x(static_cast<Eigen::Index>(i), j) *
                r.basis[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      }
      r.feat_min[static_cast<std::size_t>(k)] =
          std::min(r.feat_min[static_cast<std::size_t>(k)], proj);
      r.feat_max[static_cast<std::size_t>(k)] =
          std::max(r.feat_max[static_cast<std::size_t>(k)], proj);
    }
  }
  return r;
}

std::vector<Sample> reduce(const Reducer& r, const RawDataset& ds) {
  const std::size_t dim = r.basis.size();
  const std::size_t px = r.mean.size();
  std::vector<Sample> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.images[i].size() != px) {
      throw std::invalid_argument("image size does not match reducer");
    }
    Sample s;
    s.label = ds.labels[i];
    s.features.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      double proj = 0.0;
      for (std::size_t j = 0; j < px; ++j) {
        proj += (static_cast<double>(ds.images[i][j]) - r.mean[j]) *
                r.basis[k][j];
      }
      const double span = r.feat_max[k] - r.feat_min[k];
      double f = span > 0.0 ? (proj - r.feat_min[k]) / span * std::numbers::pi
                            : 0.0;
      s.features[k] = std::clamp(f, 0.0, std::numbers::pi);
    }
    out.push_back(std::move(s));
  }
  return out;
}

StateVector angle_encode(const Sample& s) {
  for (double f : s.features) {
    if (f < 0.0 || f > std::numbers::pi) {
      throw std::invalid_argument("feature out of [0, pi]");
    }
  }
  StateVector state = init_state(static_cast<int>(s.features.size()));
  for (std::size_t q = 0; q < s.features.size(); ++q) {
    apply_single(state, static_cast<int>(q), ry(s.features[q]));
  }
  return state;
}

namespace {
constexpr std::uint32_t kSampleMagic = 0x41514453;  // "AQDS"

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, std::size_t& off) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated sample cache", off);
  off += sizeof(T);
  return v;
}
}  // namespace

void save_samples(const std::string& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::int32_t dim =
      samples.empty() ? 0 : static_cast<std::int32_t>(samples[0].features.size());
  write_pod(out, kSampleMagic);
  write_pod(out, dim);
  write_pod(out, static_cast<std::int32_t>(samples.size()));
  for (const Sample& s : samples) {
    for (double f : s.features) write_pod(out, f);
    write_pod(out, static_cast<std::int32_t>(s.label));
  }
}

std::vector<Sample> load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::size_t off = 0;
  if (read_pod<std::uint32_t>(in, off) != kSampleMagic) {
    throw FormatError("bad sample cache magic in " + path, 0);
  }
  const std::int32_t dim = read_pod<std::int32_t>(in, off);
  const std::int32_t count = read_pod<std::int32_t>(in, off);
  if (dim < 0 || count < 0) throw FormatError("bad sample cache header", 4);
  std::vector<Sample> samples(static_cast<std::size_t>(count));
  for (Sample& s : samples) {
    s.features.resize(static_cast<std::size_t>(dim));
    for (double& f : s.features) f = read_pod<double>(in, off);
    s.label = read_pod<std::int32_t>(in, off);
  }
  return samples;
}

void save_reducer(const std::string& path, const Reducer& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_pod(out, kSampleMagic + 1);
  write_pod(out, static_cast<std::int32_t>(r.mean.size()));
  write_pod(out, static_cast<std::int32_t>(r.basis.size()));
  for (double v : r.mean) write_pod(out, v);
  for (const auto& row : r.basis)
    for (double v : row) write_pod(out, v);
  for (double v : r.feat_min) write_pod(out, v);
  for (double v : r.feat_max) write_pod(out, v);
}

Reducer load_reducer(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::size_t off = 0;
  if (read_pod<std::uint32_t>(in, off) != kSampleMagic + 1) {
    throw FormatError("bad reducer cache magic in " + path, 0);
  }
  const std::int32_t px = read_pod<std::int32_t>(in, off);
  const std::int32_t dim = read_pod<std::int32_t>(in, off);
  Reducer r;
  r.mean.resize(static_cast<std::size_t>(px));
  for (double& v : r.mean) v = read_pod<double>(in, off);
  r.basis.assign(static_cast<std::size_t>(dim),
                 std::vector<double>(static_cast<std::size_t>(px)));
  for (auto& row : r.basis)
    for (double& v : row) v = read_pod<double>(in, off);
  r.feat_min.resize(static_cast<std::size_t>(dim));
  for (double& v : r.feat_min) v = read_pod<double>(in, off);
  r.feat_max.resize(static_cast<std::size_t>(dim));
  for (double& v : r.feat_max) v = read_pod<double>(in, off);
  return r;
}

}  // namespace aqcnn
