#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "ncota/errors.hpp"
#include "ncota/learner.hpp"

namespace ncota {
namespace {

constexpr std::uint32_t kImagesMagic = 2051;
constexpr std::uint32_t kLabelsMagic = 2049;
constexpr int kDigitClasses = 10;

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open IDX file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw FormatError("IDX file '" + path.string() + "' is truncated inside its header");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void expect_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    std::ostringstream msg;
    msg << "IDX file '" << path.string() << "' has magic number " << got << ", expected " << want;
    throw FormatError(msg.str());
  }
}

void expect_payload(std::size_t have, std::size_t need, const std::filesystem::path& path) {
  if (have < need) {
    std::ostringstream msg;
    msg << "IDX file '" << path.string() << "' is truncated: header declares " << need
        << " payload bytes, found " << have;
    throw FormatError(msg.str());
  }
}

}  // namespace

Dataset load_idx_dataset(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path) {
  const auto image_bytes = read_all(images_path);
  expect_magic(read_be32(image_bytes, 0, images_path), kImagesMagic, images_path);
  const std::size_t count = read_be32(image_bytes, 4, images_path);
  const std::size_t rows = read_be32(image_bytes, 8, images_path);
  const std::size_t cols = read_be32(image_bytes, 12, images_path);
  const std::size_t dim = rows * cols;
  expect_payload(image_bytes.size() - 16, count * dim, images_path);

  const auto label_bytes = read_all(labels_path);
  expect_magic(read_be32(label_bytes, 0, labels_path), kLabelsMagic, labels_path);
  const std::size_t label_count = read_be32(label_bytes, 4, labels_path);
  expect_payload(label_bytes.size() - 8, label_count, labels_path);

  if (label_count != count) {
    std::ostringstream msg;
    msg << "IDX sample counts differ: '" << images_path.string() << "' has " << count
        << " images, '" << labels_path.string() << "' has " << label_count << " labels";
    throw ConsistencyError(msg.str());
  }

  Dataset out;
  out.input_dim = dim;
  out.num_classes = kDigitClasses;
  out.features.resize(count * dim);
  for (std::size_t i = 0; i < count * dim; ++i) {
    out.features[i] = static_cast<double>(image_bytes[16 + i]) / 255.0;
  }
  out.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = label_bytes[8 + i];
    if (label >= kDigitClasses) {
      throw FormatError("IDX label file '" + labels_path.string() + "' has label " +
                        std::to_string(label) + " outside 0..9");
    }
    out.labels[i] = label;
  }
  return out;
}

}  // namespace ncota
