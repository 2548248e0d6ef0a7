#include "ibci/idx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ibci {
namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("load_mnist_idx: truncated file " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ofstream& f, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path,
                       const std::string& labels_path, bool scale01) {
    std::ifstream imgf(images_path, std::ios::binary);
    if (!imgf) throw std::runtime_error("load_mnist_idx: cannot open " + images_path);
    std::ifstream lblf(labels_path, std::ios::binary);
    if (!lblf) throw std::runtime_error("load_mnist_idx: cannot open " + labels_path);

    const std::uint32_t img_magic = read_be32(imgf, images_path);
    if (img_magic != kImagesMagic)
        throw std::runtime_error("load_mnist_idx: bad magic in " + images_path);
    const std::uint32_t n_images = read_be32(imgf, images_path);
    const std::uint32_t rows = read_be32(imgf, images_path);
    const std::uint32_t cols = read_be32(imgf, images_path);

    const std::uint32_t lbl_magic = read_be32(lblf, labels_path);
    if (lbl_magic != kLabelsMagic)
        throw std::runtime_error("load_mnist_idx: bad magic in " + labels_path);
    const std::uint32_t n_labels = read_be32(lblf, labels_path);

    if (n_images != n_labels)
        throw std::runtime_error("load_mnist_idx: image count " + std::to_string(n_images) +
                                 " != label count " + std::to_string(n_labels));

    const std::size_t dim = std::size_t(rows) * std::size_t(cols);
    const std::size_t total = std::size_t(n_images) * dim;

    std::vector<unsigned char> pixels(total);
    imgf.read(reinterpret_cast<char*>(pixels.data()),
              static_cast<std::streamsize>(total));
    if (!imgf) throw std::runtime_error("load_mnist_idx: truncated file " + images_path);

    std::vector<unsigned char> raw_labels(n_labels);
    lblf.read(reinterpret_cast<char*>(raw_labels.data()),
              static_cast<std::streamsize>(n_labels));
    if (!lblf) throw std::runtime_error("load_mnist_idx: truncated file " + labels_path);

    Dataset ds;
    const double scale = scale01 ? 1.0 / 255.0 : 1.0;
    ds.features.resize(static_cast<Eigen::Index>(n_images), static_cast<Eigen::Index>(dim));
    ds.labels.resize(static_cast<Eigen::Index>(n_labels));
    for (std::uint32_t i = 0; i < n_images; ++i)
        for (std::size_t q = 0; q < dim; ++q)
            ds.features(i, static_cast<Eigen::Index>(q)) =
                static_cast<double>(pixels[i * dim + q]) * scale;
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        ds.labels[i] = raw_labels[i];
        max_label = std::max(max_label, int(raw_labels[i]));
    }
    ds.n_classes = max_label + 1;
    return ds;
}

void save_mnist_idx(const Dataset& ds, const std::string& images_path,
                    const std::string& labels_path, int rows, int cols) {
    if (static_cast<Eigen::Index>(rows) * cols != ds.dim())
        throw std::invalid_argument("save_mnist_idx: rows*cols != feature dimension");

    std::ofstream imgf(images_path, std::ios::binary);
    if (!imgf) throw std::runtime_error("save_mnist_idx: cannot open " + images_path);
    write_be32(imgf, kImagesMagic);
    write_be32(imgf, static_cast<std::uint32_t>(ds.size()));
    write_be32(imgf, static_cast<std::uint32_t>(rows));
    write_be32(imgf, static_cast<std::uint32_t>(cols));
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
        for (Eigen::Index q = 0; q < ds.dim(); ++q) {
            const double v = std::clamp(ds.features(i, q), 0.0, 1.0);
            const auto byte = static_cast<unsigned char>(std::lround(v * 255.0));
            imgf.write(reinterpret_cast<const char*>(&byte), 1);
        }
    }
    if (!imgf) throw std::runtime_error("save_mnist_idx: write failed on " + images_path);

    std::ofstream lblf(labels_path, std::ios::binary);
    if (!lblf) throw std::runtime_error("save_mnist_idx: cannot open " + labels_path);
    write_be32(lblf, kLabelsMagic);
    write_be32(lblf, static_cast<std::uint32_t>(ds.size()));
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
        const auto byte = static_cast<unsigned char>(ds.labels[i]);
        lblf.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!lblf) throw std::runtime_error("save_mnist_idx: write failed on " + labels_path);
}

}  // namespace ibci
