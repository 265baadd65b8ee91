#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "fedward/data.hpp"

namespace fedward {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be_u32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    if (!f.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::vector<unsigned char> read_bytes(std::ifstream& f, std::size_t n, const std::string& path) {
    std::vector<unsigned char> buf(n);
    if (!f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n)))
        throw std::runtime_error("idx: truncated file " + path);
    return buf;
}

}  // namespace

std::vector<LabeledExample> load_idx(const std::string& images_path,
                                     const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);

    if (read_be_u32(img, images_path) != kImagesMagic)
        throw std::runtime_error("idx: bad magic in " + images_path);
    if (read_be_u32(lab, labels_path) != kLabelsMagic)
        throw std::runtime_error("idx: bad magic in " + labels_path);

    const std::uint32_t n_images = read_be_u32(img, images_path);
    const std::uint32_t rows = read_be_u32(img, images_path);
    const std::uint32_t cols = read_be_u32(img, images_path);
    const std::uint32_t n_labels = read_be_u32(lab, labels_path);
    if (n_images != n_labels)
        throw std::runtime_error("idx: count mismatch between " + images_path + " and " +
                                 labels_path);
    if (rows == 0 || cols == 0) throw std::runtime_error("idx: zero image dims in " + images_path);

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    auto pixels = read_bytes(img, static_cast<std::size_t>(n_images) * dim, images_path);
    auto labels = read_bytes(lab, n_labels, labels_path);

    std::vector<LabeledExample> out(n_images);
    for (std::size_t i = 0; i < n_images; ++i) {
        out[i].label = static_cast<int>(labels[i]);
        out[i].features.resize(dim);
        for (std::size_t j = 0; j < dim; ++j)
            out[i].features[j] = static_cast<double>(pixels[i * dim + j]) / 255.0;
    }
    return out;
}

}  // namespace fedward
