#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "daonmf/clustering.hpp"
#include "daonmf/deep.hpp"
#include "daonmf/matrix.hpp"

namespace daonmf {

// Column j of x is sample j.
struct Dataset {
  NonnegMatrix x;
  std::optional<Labels> labels;
  std::string name;
};

// Matrix text format: a "rows cols" line, then one line per row with the
// values separated by single spaces, LF line endings. Values are written with
// 17 significant digits so a save/load round trip is exact.
void write_matrix(std::ostream& out, const Matrix& m);
void save_matrix(const std::filesystem::path& path, const Matrix& m);
// Signed values allowed. Throws InvalidData on malformed input.
Matrix read_matrix(std::istream& in, const std::string& source = "<stream>");
Matrix read_matrix_file(const std::filesystem::path& path);
// As read_matrix_file, but a negative entry is InvalidData.
NonnegMatrix load_matrix(const std::filesystem::path& path);

// One integer label per line.
void save_labels(const std::filesystem::path& path, const Labels& labels);
Labels load_labels(const std::filesystem::path& path);

// Binary (P5) 8-bit PGM; pixels scaled by 1/maxval into [0, 1], row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;
};
GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
              const std::vector<std::uint8_t>& pixels);

// Directory of per-class subdirectories (sorted by name) of side x side PGM
// images. X is side^2 x N, one flattened image per column; labels follow the
// subdirectory order. Throws InvalidData naming the offending file or path.
Dataset load_image_dataset(const std::filesystem::path& dir, std::size_t side);

// Planted block-cluster data: X = W* H*^T + noise |N(0,1)|. Cluster c owns the
// feature rows [c b, (c+1) b) with b = m / k; H* holds one positive entry per
// sample in its cluster's column, so H*'s columns are orthogonal. Samples are
// ordered cluster by cluster. Throws ConfigError if k == 0, n_per == 0 or k > m.
Dataset synth_planted(std::size_t k, std::size_t n_per, std::size_t m, double noise,
                      std::uint64_t seed);

// Dataset directory: X.mat plus labels.txt when labels are present.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);
// Accepts a dataset directory or a bare matrix file.
Dataset load_dataset(const std::filesystem::path& path);

// Model directory: `meta` plus W1.mat, H1.mat ... HL.mat.
void save_model(const std::filesystem::path& dir, const DeepModel& model);
DeepModel load_model(const std::filesystem::path& dir);

}  // namespace daonmf
