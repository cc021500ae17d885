#include "aqcnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include "aqcnn/common.hpp"

namespace aqcnn {

namespace {
constexpr int kSide = 28;
constexpr double kPi = std::numbers::pi;

// splitmix64: stable across platforms and standard-library versions.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gauss() {
    const double u1 = std::max(uniform(), 1e-12);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
};

struct Pt {
  double x, y;
};

using Polyline = std::vector<Pt>;

struct Glyph {
  std::vector<Polyline> strokes;  // rasterized as soft tubes
  std::vector<Polyline> fills;    // closed polygons, rasterized solid
};

Polyline arc(double cx, double cy, double rx, double ry, double t0, double t1,
             int steps = 40) {
  Polyline p;
  p.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double t = t0 + (t1 - t0) * i / steps;
    p.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return p;
}

Polyline seg(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y1}};
}

// Canonical digit glyphs in [0,1]^2, y pointing down.
Glyph digit_glyph(int cls) {
  Glyph g;
  switch (cls) {
    case 0:
      g.strokes.push_back(arc(0.5, 0.5, 0.21, 0.30, 0, 2 * kPi));
      break;
    case 1:
      g.strokes.push_back(seg(0.52, 0.18, 0.52, 0.82));
      g.strokes.push_back(seg(0.38, 0.32, 0.52, 0.18));
      break;
    case 2:
      g.strokes.push_back(arc(0.5, 0.34, 0.20, 0.16, kPi, 2 * kPi + 0.5));
      g.strokes.push_back(seg(0.675, 0.42, 0.30, 0.80));
      g.strokes.push_back(seg(0.30, 0.80, 0.72, 0.80));
      break;
    case 3:
      g.strokes.push_back(arc(0.47, 0.34, 0.19, 0.15, -0.75 * kPi, 0.5 * kPi));
      g.strokes.push_back(arc(0.47, 0.64, 0.21, 0.16, -0.5 * kPi, 0.75 * kPi));
      break;
    case 4:
      g.strokes.push_back(seg(0.62, 0.18, 0.62, 0.82));
      g.strokes.push_back(seg(0.62, 0.18, 0.32, 0.58));
      g.strokes.push_back(seg(0.32, 0.58, 0.74, 0.58));
      break;
    case 5:
      g.strokes.push_back(seg(0.68, 0.20, 0.36, 0.20));
      g.strokes.push_back(seg(0.36, 0.20, 0.34, 0.48));
      g.strokes.push_back(arc(0.48, 0.62, 0.19, 0.18, -0.55 * kPi, 0.8 * kPi));
      break;
    case 6:
      g.strokes.push_back(arc(0.60, 0.28, 0.28, 0.42, 0.85 * kPi, 1.45 * kPi));
      g.strokes.push_back(arc(0.50, 0.62, 0.17, 0.17, 0, 2 * kPi));
      break;
    case 7:
      g.strokes.push_back(seg(0.30, 0.20, 0.72, 0.20));
      g.strokes.push_back(seg(0.72, 0.20, 0.42, 0.82));
      break;
    case 8:
      g.strokes.push_back(arc(0.5, 0.34, 0.16, 0.14, 0, 2 * kPi));
      g.strokes.push_back(arc(0.5, 0.64, 0.19, 0.17, 0, 2 * kPi));
      break;
    default:  // 9
      g.strokes.push_back(arc(0.48, 0.36, 0.17, 0.16, 0, 2 * kPi));
      g.strokes.push_back(arc(0.40, 0.70, 0.28, 0.40, -0.45 * kPi, 0.15 * kPi));
      break;
  }
  return g;
}

// Fashion-style silhouettes: mostly filled shapes with a few strokes.
Glyph fashion_glyph(int cls) {
  Glyph g;
  switch (cls) {
    case 0:  // t-shirt/top: torso with short sleeves
      g.fills.push_back({{0.35, 0.25}, {0.65, 0.25}, {0.68, 0.72},
                         {0.32, 0.72}});
      g.fills.push_back({{0.18, 0.28}, {0.38, 0.24}, {0.36, 0.42},
                         {0.20, 0.44}});
      g.fills.push_back({{0.62, 0.24}, {0.82, 0.28}, {0.80, 0.44},
                         {0.64, 0.42}});
      break;
    case 1:  // trouser: two legs
      g.fills.push_back({{0.34, 0.20}, {0.48, 0.20}, {0.46, 0.84},
                         {0.34, 0.84}});
      g.fills.push_back({{0.52, 0.20}, {0.66, 0.20}, {0.66, 0.84},
                         {0.54, 0.84}});
      g.fills.push_back({{0.34, 0.18}, {0.66, 0.18}, {0.66, 0.30},
                         {0.34, 0.30}});
      break;
    case 2:  // pullover: torso with long sleeves
      g.fills.push_back({{0.36, 0.24}, {0.64, 0.24}, {0.66, 0.76},
                         {0.34, 0.76}});
      g.fills.push_back({{0.16, 0.26}, {0.38, 0.24}, {0.30, 0.72},
                         {0.16, 0.70}});
      g.fills.push_back({{0.62, 0.24}, {0.84, 0.26}, {0.84, 0.70},
                         {0.70, 0.72}});
      break;
    case 3:  // dress: fitted top flaring out
      g.fills.push_back({{0.42, 0.16}, {0.58, 0.16}, {0.62, 0.44},
                         {0.76, 0.84}, {0.24, 0.84}, {0.38, 0.44}});
      break;
    case 4:  // coat: long torso, open front
      g.fills.push_back({{0.34, 0.20}, {0.48, 0.20}, {0.48, 0.84},
                         {0.30, 0.84}});
      g.fills.push_back({{0.52, 0.20}, {0.66, 0.20}, {0.70, 0.84},
                         {0.52, 0.84}});
      g.fills.push_back({{0.18, 0.24}, {0.36, 0.22}, {0.32, 0.60},
                         {0.18, 0.58}});
      g.fills.push_back({{0.64, 0.22}, {0.82, 0.24}, {0.82, 0.58},
                         {0.68, 0.60}});
      break;
    case 5:  // sandal: sole with straps
      g.fills.push_back({{0.18, 0.62}, {0.82, 0.62}, {0.84, 0.72},
                         {0.16, 0.72}});
      g.strokes.push_back(seg(0.28, 0.62, 0.44, 0.38));
      g.strokes.push_back(seg(0.44, 0.38, 0.62, 0.62));
      g.strokes.push_back(seg(0.55, 0.48, 0.72, 0.62));
      break;
    case 6:  // shirt: torso, sleeves and collar line
      g.fills.push_back({{0.36, 0.24}, {0.64, 0.24}, {0.65, 0.78},
                         {0.35, 0.78}});
      g.fills.push_back({{0.18, 0.28}, {0.38, 0.24}, {0.34, 0.56},
                         {0.20, 0.54}});
      g.fills.push_back({{0.62, 0.24}, {0.82, 0.28}, {0.80, 0.54},
                         {0.66, 0.56}});
      g.strokes.push_back(seg(0.5, 0.26, 0.5, 0.76));
      break;
    case 7:  // sneaker: low wedge
      g.fills.push_back({{0.16, 0.58}, {0.52, 0.54}, {0.62, 0.42},
                         {0.84, 0.52}, {0.84, 0.70}, {0.16, 0.70}});
      break;
    case 8:  // bag: body with handle arc
      g.fills.push_back({{0.24, 0.42}, {0.76, 0.42}, {0.80, 0.78},
                         {0.20, 0.78}});
      g.strokes.push_back(arc(0.5, 0.42, 0.16, 0.18, kPi, 2 * kPi));
      break;
    default:  // 9: ankle boot
      g.fills.push_back({{0.30, 0.22}, {0.52, 0.22}, {0.52, 0.52},
                         {0.72, 0.56}, {0.82, 0.66}, {0.82, 0.74},
                         {0.28, 0.74}});
      break;
  }
  return g;
}

double dist_to_segment(double px, double py, const Pt& a, const Pt& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = px - (a.x + t * dx), ey = py - (a.y + t * dy);
  return std::sqrt(ex * ex + ey * ey);
}

bool point_in_polygon(double px, double py, const Polyline& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    if ((poly[i].y > py) != (poly[j].y > py)) {
      const double xint = poly[j].x + (py - poly[j].y) /
                                          (poly[i].y - poly[j].y) *
                                          (poly[i].x - poly[j].x);
      if (px < xint) inside = !inside;
    }
  }
  return inside;
}

std::vector<std::uint8_t> render(const Glyph& glyph, Rng& rng) {
  // Per-sample affine jitter around the glyph center.
  const double rot = rng.uniform(-0.035, 0.035);
  const double sx = rng.uniform(0.94, 1.06);
  const double sy = rng.uniform(0.94, 1.06);
  const double shear = rng.uniform(-0.035, 0.035);
  const double tx = rng.uniform(-0.025, 0.025);
  const double ty = rng.uniform(-0.025, 0.025);
  const double cr = std::cos(rot), sr = std::sin(rot);

  auto xform = [&](const Pt& p) -> Pt {
    const double x0 = (p.x - 0.5) * sx + shear * (p.y - 0.5);
    const double y0 = (p.y - 0.5) * sy;
    return {0.5 + cr * x0 - sr * y0 + tx, 0.5 + sr * x0 + cr * y0 + ty};
  };

  Glyph t;
  for (const Polyline& s : glyph.strokes) {
    Polyline ts;
    ts.reserve(s.size());
    for (const Pt& p : s) ts.push_back(xform(p));
    t.strokes.push_back(std::move(ts));
  }
  for (const Polyline& f : glyph.fills) {
    Polyline tf;
    tf.reserve(f.size());
    for (const Pt& p : f) tf.push_back(xform(p));
    t.fills.push_back(std::move(tf));
  }

  const double stroke_w = rng.uniform(0.030, 0.050);
  const double edge_w = 0.02;
  const double peak = rng.uniform(200.0, 255.0);
  const double noise_sigma = 3.0;

  std::vector<std::uint8_t> img(kSide * kSide);
  for (int r = 0; r < kSide; ++r) {
    for (int c = 0; c < kSide; ++c) {
      const double px = (c + 0.5) / kSide;
      const double py = (r + 0.5) / kSide;
      double intensity = 0.0;
      for (const Polyline& s : t.strokes) {
        double d = 1e9;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
          d = std::min(d, dist_to_segment(px, py, s[i], s[i + 1]));
        }
        intensity = std::max(
            intensity, std::exp(-d * d / (2.0 * stroke_w * stroke_w)));
      }
      for (const Polyline& f : t.fills) {
        if (point_in_polygon(px, py, f)) {
          intensity = std::max(intensity, 1.0);
        } else {
          double d = 1e9;
          for (std::size_t i = 0, j = f.size() - 1; i < f.size(); j = i++) {
            d = std::min(d, dist_to_segment(px, py, f[j], f[i]));
          }
          intensity =
              std::max(intensity, std::exp(-d * d / (2.0 * edge_w * edge_w)));
        }
      }
      double v = peak * intensity + noise_sigma * rng.gauss();
      img[static_cast<std::size_t>(r) * kSide + c] =
          static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return img;
}

void be32_out(std::ofstream& out, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}
}  // namespace

void write_synthetic_idx(const std::string& dir, const std::string& prefix,
                         SynthKind kind, int per_class, std::uint64_t seed) {
  if (per_class < 1) throw std::invalid_argument("per_class must be >= 1");
  const std::string img_path = dir + "/" + prefix + "-images-idx3-ubyte";
  const std::string lbl_path = dir + "/" + prefix + "-labels-idx1-ubyte";
  std::ofstream img_out(img_path, std::ios::binary);
  std::ofstream lbl_out(lbl_path, std::ios::binary);
  if (!img_out || !lbl_out) {
    throw std::runtime_error("cannot write IDX files under " + dir);
  }

  const std::uint32_t count = static_cast<std::uint32_t>(per_class) * 10;
  be32_out(img_out, 0x00000803);
  be32_out(img_out, count);
  be32_out(img_out, kSide);
  be32_out(img_out, kSide);
  be32_out(lbl_out, 0x00000801);
  be32_out(lbl_out, count);

  // Interleave classes so any prefix of the file is roughly balanced.
  for (int i = 0; i < per_class; ++i) {
    for (int cls = 0; cls < 10; ++cls) {
      Rng rng(seed ^ (0x517cc1b727220a95ULL * static_cast<std::uint64_t>(
                                                  i * 10 + cls + 1)) ^
              (kind == SynthKind::Fashion ? 0xf00dULL : 0));
      const Glyph glyph = kind == SynthKind::Digits ? digit_glyph(cls)
                                                    : fashion_glyph(cls);
      const std::vector<std::uint8_t> img = render(glyph, rng);
      img_out.write(reinterpret_cast<const char*>(img.data()),
                    static_cast<std::streamsize>(img.size()));
      lbl_out.put(static_cast<char>(cls));
    }
  }
}

}  // namespace aqcnn
