#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrnn/rng.hpp"
#include "agrnn/tensor.hpp"
#include "agrnn/train.hpp"

namespace agrnn {

inline constexpr std::size_t kMnistSide = 28;
inline constexpr std::size_t kMnistPixels = kMnistSide * kMnistSide;
inline constexpr std::size_t kMnistClasses = 10;

struct MnistSample {
  std::array<double, kMnistPixels> pixels{};  // row-major, in [0, 1]
  std::uint8_t label = 0;
};

class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_be32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw IdxError(path + ": truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline std::ifstream open_idx(const std::string& path, std::uint32_t magic) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IdxError("cannot open '" + path + "'");
  const std::uint32_t got = read_be32(is, path);
  if (got != magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ": bad magic 0x%08x (expected 0x%08x)", got,
                  magic);
    throw IdxError(path + buf);
  }
  return is;
}

}  // namespace detail

// Big-endian IDX: images magic 0x00000803 (count x 28 x 28 bytes), labels
// magic 0x00000801 (count bytes). Pixels are scaled by 1/255.
inline std::vector<MnistSample> load_mnist_idx(
    const std::string& images_path, const std::string& labels_path,
    std::optional<std::size_t> limit = std::nullopt) {
  auto img = detail::open_idx(images_path, 0x00000803);
  const std::uint32_t count = detail::read_be32(img, images_path);
  const std::uint32_t rows = detail::read_be32(img, images_path);
  const std::uint32_t cols = detail::read_be32(img, images_path);
  if (rows != kMnistSide || cols != kMnistSide) {
    throw IdxError(images_path + ": image dims " + std::to_string(rows) + "x" +
                   std::to_string(cols) + " (expected 28x28)");
  }
  auto lab = detail::open_idx(labels_path, 0x00000801);
  const std::uint32_t lcount = detail::read_be32(lab, labels_path);
  if (lcount != count) {
    throw IdxError("count mismatch: " + std::to_string(count) + " images vs " +
                   std::to_string(lcount) + " labels");
  }

  const std::size_t n = limit ? std::min<std::size_t>(*limit, count) : count;
  std::vector<MnistSample> out(n);
  std::vector<unsigned char> buf(kMnistPixels);
  for (std::size_t k = 0; k < n; ++k) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), kMnistPixels))
      throw IdxError(images_path + ": truncated at image " + std::to_string(k));
    for (std::size_t p = 0; p < kMnistPixels; ++p)
      out[k].pixels[p] = double(buf[p]) / 255.0;
    char label;
    if (!lab.get(label))
      throw IdxError(labels_path + ": truncated at label " + std::to_string(k));
    out[k].label = static_cast<std::uint8_t>(label);
    if (out[k].label >= kMnistClasses)
      throw IdxError(labels_path + ": label " + std::to_string(out[k].label) +
                     " out of range at " + std::to_string(k));
  }
  return out;
}

// Row t of the image becomes x_t.
inline std::vector<Vector> mnist_as_sequence(const MnistSample& s) {
  std::vector<Vector> xs(kMnistSide, Vector(kMnistSide));
  for (std::size_t r = 0; r < kMnistSide; ++r)
    for (std::size_t c = 0; c < kMnistSide; ++c)
      xs[r][c] = s.pixels[r * kMnistSide + c];
  return xs;
}

inline Dataset mnist_dataset(const std::vector<MnistSample>& samples) {
  Dataset d;
  d.reserve(samples.size());
  for (const auto& s : samples) {
    Vector onehot(kMnistClasses);
    onehot[s.label] = 1.0;
    d.push_back({mnist_as_sequence(s), std::move(onehot)});
  }
  return d;
}

struct MnistSplit {
  std::vector<MnistSample> train;
  std::vector<MnistSample> test;
};

// Disjoint seeded subsets drawn from one permutation of `all`.
inline MnistSplit mnist_subset(const std::vector<MnistSample>& all,
                               std::size_t train_n, std::size_t test_n,
                               std::uint64_t seed) {
  if (train_n + test_n > all.size()) {
    throw std::invalid_argument("mnist_subset: requested " +
                                std::to_string(train_n + test_n) +
                                " samples from " + std::to_string(all.size()));
  }
  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(idx, rng);
  MnistSplit s;
  for (std::size_t k = 0; k < train_n; ++k) s.train.push_back(all[idx[k]]);
  for (std::size_t k = 0; k < test_n; ++k) s.test.push_back(all[idx[train_n + k]]);
  return s;
}

}  // namespace agrnn
