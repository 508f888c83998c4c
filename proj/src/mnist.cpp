#include "prelu/mnist.hpp"

#include <cstdint>
#include <fstream>
#include <vector>

namespace prelu {

namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw MnistParseError(MnistErrorKind::Truncated, path + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MnistParseError(MnistErrorKind::Truncated, path + ": cannot open");
    return in;
}

} // namespace

MnistSplit load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img = open_or_throw(images_path);
    const std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != kImageMagic)
        throw MnistParseError(MnistErrorKind::BadMagic,
                              images_path + ": bad image magic " + std::to_string(img_magic));
    const std::uint32_t n_img = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);
    const std::size_t pixels = std::size_t(rows) * cols;

    std::vector<unsigned char> buf(std::size_t(n_img) * pixels);
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
        throw MnistParseError(MnistErrorKind::Truncated, images_path + ": truncated pixel data");

    std::ifstream lab = open_or_throw(labels_path);
    const std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != kLabelMagic)
        throw MnistParseError(MnistErrorKind::BadMagic,
                              labels_path + ": bad label magic " + std::to_string(lab_magic));
    const std::uint32_t n_lab = read_be32(lab, labels_path);
    if (n_lab != n_img)
        throw MnistParseError(MnistErrorKind::CountMismatch,
                              images_path + " has " + std::to_string(n_img) + " images but " +
                                  labels_path + " has " + std::to_string(n_lab) + " labels");
    std::vector<unsigned char> lbuf(n_lab);
    if (!lab.read(reinterpret_cast<char*>(lbuf.data()), static_cast<std::streamsize>(lbuf.size())))
        throw MnistParseError(MnistErrorKind::Truncated, labels_path + ": truncated label data");

    MnistSplit split;
    split.images.resize(static_cast<Index>(n_img), static_cast<Index>(pixels));
    for (std::size_t i = 0; i < n_img; ++i)
        for (std::size_t p = 0; p < pixels; ++p)
            split.images(static_cast<Index>(i), static_cast<Index>(p)) =
                static_cast<double>(buf[i * pixels + p]) / 255.0;
    split.labels.resize(static_cast<Index>(n_lab));
    for (std::size_t i = 0; i < n_lab; ++i) split.labels[static_cast<Index>(i)] = lbuf[i];
    return split;
}

void save_mnist_idx(const MnistSplit& split, Index rows, Index cols,
                    const std::string& images_path, const std::string& labels_path) {
    if (rows * cols != split.images.cols())
        throw std::invalid_argument("save_mnist_idx: rows*cols != image width");
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("save_mnist_idx: cannot open " + images_path);
    write_be32(img, kImageMagic);
    write_be32(img, static_cast<std::uint32_t>(split.size()));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    for (Index i = 0; i < split.size(); ++i)
        for (Index p = 0; p < split.images.cols(); ++p) {
            const double v = std::clamp(split.images(i, p), 0.0, 1.0);
            const auto byte = static_cast<unsigned char>(std::lround(v * 255.0));
            img.write(reinterpret_cast<const char*>(&byte), 1);
        }

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("save_mnist_idx: cannot open " + labels_path);
    write_be32(lab, kLabelMagic);
    write_be32(lab, static_cast<std::uint32_t>(split.size()));
    for (Index i = 0; i < split.size(); ++i) {
        const auto byte = static_cast<unsigned char>(split.labels[i]);
        lab.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

namespace {

Dataset center_and_normalize(const MnistSplit& split, const Vector& train_mean, bool parity) {
    Dataset ds;
    ds.provenance = parity ? Provenance::MnistParity : Provenance::MnistDigits;
    ds.samples.reserve(static_cast<std::size_t>(split.size()));
    for (Index i = 0; i < split.size(); ++i) {
        LabeledSample s;
        s.x = split.images.row(i).transpose() - train_mean;
        const double n = s.x.norm();
        if (n > 0.0) s.x /= n;  // zero residuals stay zero
        const int digit = split.labels[i];
        if (parity) {
            s.y = (digit % 2 == 0) ? +1 : -1;
            s.z = digit + 1;
        } else {
            s.y = digit;
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

} // namespace

std::pair<Dataset, Dataset> preprocess_parity(const MnistSplit& train, const MnistSplit& test) {
    const Vector mean = train.images.colwise().mean().transpose();
    return {center_and_normalize(train, mean, true), center_and_normalize(test, mean, true)};
}

std::pair<Dataset, Dataset> preprocess_digits(const MnistSplit& train, const MnistSplit& test) {
    const Vector mean = train.images.colwise().mean().transpose();
    return {center_and_normalize(train, mean, false), center_and_normalize(test, mean, false)};
}

} // namespace prelu
