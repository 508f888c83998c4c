#pragma once

#include <string>
#include <utility>

#include "prelu/data.hpp"
#include "prelu/types.hpp"

namespace prelu {

enum class MnistErrorKind { BadMagic, Truncated, CountMismatch };

struct MnistParseError : std::runtime_error {
    MnistErrorKind kind;
    MnistParseError(MnistErrorKind k, const std::string& what)
        : std::runtime_error(what), kind(k) {}
};

/// One loaded split: pixel rows in [0,1] (n x 784 for MNIST) and digit labels.
struct MnistSplit {
    Matrix images;
    VectorI labels;
    Index size() const { return images.rows(); }
};

/// Reads a big-endian IDX image/label file pair. Enforces magics 2051/2049,
/// complete payloads, and matching counts; pixels are divided by 255.
MnistSplit load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// Writes a split back out in IDX format (rows x cols must match the image
/// width); used by tests and for exporting derived datasets.
void save_mnist_idx(const MnistSplit& split, Index rows, Index cols,
                    const std::string& images_path, const std::string& labels_path);

/// Parity relabeling (+1 even, -1 odd), centering by the training mean image,
/// and per-sample normalization to unit L2 norm (zero residuals stay zero).
/// Takes raw splits, so a preprocessed Dataset cannot be fed back in by
/// accident. z records digit + 1.
std::pair<Dataset, Dataset> preprocess_parity(const MnistSplit& train, const MnistSplit& test);

/// Same centering/normalization with the 0..9 labels kept (provenance
/// mnist-digits).
std::pair<Dataset, Dataset> preprocess_digits(const MnistSplit& train, const MnistSplit& test);

} // namespace prelu
