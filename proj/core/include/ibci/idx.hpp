#pragma once

// IDX binary file I/O (the MNIST distribution format).
//
// Images file: u32 big-endian magic 0x00000803, u32 count, u32 rows,
// u32 cols, then count*rows*cols unsigned bytes.
// Labels file: u32 big-endian magic 0x00000801, u32 count, count bytes.

#include "ibci/dataset.hpp"

#include <string>

namespace ibci {

// Parses an images/labels file pair into a Dataset. Pixels are scaled to
// [0, 1] by /255 when scale01 is set (default); labels become n_classes =
// max label + 1. Throws std::runtime_error on magic/count/IO violations,
// naming the offending file.
Dataset load_mnist_idx(const std::string& images_path,
                       const std::string& labels_path, bool scale01 = true);

// Writes a Dataset back to the IDX pair with the given image geometry
// (rows*cols must equal the feature dimension). Feature values are clamped
// to [0, 1] and quantized to bytes; a dataset that came from load_mnist_idx
// round-trips bit-identically.
void save_mnist_idx(const Dataset& ds, const std::string& images_path,
                    const std::string& labels_path, int rows, int cols);

}  // namespace ibci
