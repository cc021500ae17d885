#pragma once

#include <cstdint>
#include <string>

namespace aqcnn {

// Deterministic synthetic stand-ins for the MNIST and Fashion-MNIST IDX
// files: 10 glyph classes rendered at 28x28 with per-sample affine jitter,
// stroke-width variation and pixel noise. Used when the real datasets are
// not available; the files are byte-for-byte reproducible from the seed.
enum class SynthKind { Digits, Fashion };

// Writes <prefix>-images-idx3-ubyte and <prefix>-labels-idx1-ubyte under
// dir, with per_class samples of each of the 10 classes.
void write_synthetic_idx(const std::string& dir, const std::string& prefix,
                         SynthKind kind, int per_class, std::uint64_t seed);

}  // namespace aqcnn
