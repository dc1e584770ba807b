#include "daonmf/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "daonmf/error.hpp"
#include "daonmf/rng.hpp"

namespace daonmf {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InvalidData("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw InvalidData("cannot write " + path.string());
  return out;
}

bool parse_size(std::string_view token, std::size_t& value) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

bool parse_double(std::string_view token, double& value) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc{} && ptr == end && std::isfinite(value);
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t next = line.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? line.size() : next;
    out.push_back(line.substr(pos, end - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Next header token of a PGM file, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in, const fs::path& path) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (token.empty()) throw InvalidData(path.string() + ": truncated PGM header");
  return token;
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (directories ? entry.is_directory() : entry.is_regular_file()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void save_matrix(const fs::path& path, const Matrix& m) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  write_matrix(out, m);
  if (!out) throw InvalidData("failed writing " + path.string());
}

Matrix read_matrix(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidData(source + ": empty matrix file");
  const auto header = split_spaces(line);
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (header.size() != 2 || !parse_size(header[0], rows) || !parse_size(header[1], cols)) {
    throw InvalidData(source + ": first line must be 'rows cols'");
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw InvalidData(source + ": expected " + std::to_string(rows) + " rows, found " +
                        std::to_string(i));
    }
    if (cols == 0) {
      if (!line.empty()) throw InvalidData(source + ": row " + std::to_string(i + 1) + " should be empty");
      continue;
    }
    const auto tokens = split_spaces(line);
    if (tokens.size() != cols) {
      throw InvalidData(source + ": row " + std::to_string(i + 1) + " has " +
                        std::to_string(tokens.size()) + " values, expected " +
                        std::to_string(cols));
    }
    for (const auto token : tokens) {
      double v = 0.0;
      if (!parse_double(token, v)) {
        throw InvalidData(source + ": row " + std::to_string(i + 1) + ": bad value '" +
                          std::string(token) + "'");
      }
      data.push_back(v);
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw InvalidData(source + ": trailing content after " + std::to_string(rows) + " rows");
  }
  return Matrix(rows, cols, std::move(data));
}

Matrix read_matrix_file(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return read_matrix(in, path.string());
}

NonnegMatrix load_matrix(const fs::path& path) {
  Matrix m = read_matrix_file(path);
  if (!all_nonneg(m)) throw InvalidData(path.string() + ": negative entry in nonnegative matrix");
  return NonnegMatrix(std::move(m));
}

void save_labels(const fs::path& path, const Labels& labels) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  for (std::size_t v : labels) out << v << '\n';
  if (!out) throw InvalidData("failed writing " + path.string());
}

Labels load_labels(const fs::path& path) {
  auto in = open_in(path);
  Labels labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t v = 0;
    if (!parse_size(line, v)) {
      throw InvalidData(path.string() + ": line " + std::to_string(lineno) + ": bad label '" + line + "'");
    }
    labels.push_back(v);
  }
  return labels;
}

GrayImage load_pgm(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  if (pgm_token(in, path) != "P5") throw InvalidData(path.string() + ": not a binary (P5) PGM");
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t maxval = 0;
  if (!parse_size(pgm_token(in, path), width) || !parse_size(pgm_token(in, path), height) ||
      !parse_size(pgm_token(in, path), maxval)) {
    throw InvalidData(path.string() + ": malformed PGM header");
  }
  if (maxval == 0 || maxval > 255) {
    throw InvalidData(path.string() + ": only 8-bit PGM is supported (maxval " +
                      std::to_string(maxval) + ")");
  }
  // pgm_token consumed the single whitespace byte after maxval.
  std::vector<char> raw(width * height);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw InvalidData(path.string() + ": truncated pixel data");
  }
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(raw.size());
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto byte = static_cast<unsigned char>(raw[i]);
    img.pixels[i] = std::min(1.0, static_cast<double>(byte) * scale);
  }
  return img;
}

void save_pgm(const fs::path& path, std::size_t width, std::size_t height,
              const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != width * height) throw DimError("save_pgm: pixel count mismatch");
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw InvalidData("failed writing " + path.string());
}

Dataset load_image_dataset(const fs::path& dir, std::size_t side) {
  if (!fs::is_directory(dir)) throw InvalidData(dir.string() + ": image dataset directory not found");
  if (side == 0) throw ConfigError("load_image_dataset: side must be positive");

  std::vector<std::vector<double>> columns;
  Labels labels;
  const auto classes = sorted_entries(dir, true);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (const auto& file : sorted_entries(classes[c], false)) {
      if (file.extension() != ".pgm") continue;
      GrayImage img = load_pgm(file);
      if (img.width != side || img.height != side) {
        throw InvalidData(file.string() + ": image is " + std::to_string(img.width) + "x" +
                          std::to_string(img.height) + ", expected " + std::to_string(side) +
                          "x" + std::to_string(side));
      }
      columns.push_back(std::move(img.pixels));
      labels.push_back(c);
    }
  }
  if (columns.empty()) throw InvalidData(dir.string() + ": no PGM images found");

  Matrix x(side * side, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (std::size_t i = 0; i < side * side; ++i) x(i, j) = columns[j][i];
  return {NonnegMatrix(std::move(x)), std::move(labels), dir.filename().string()};
}

Dataset synth_planted(std::size_t k, std::size_t n_per, std::size_t m, double noise,
                      std::uint64_t seed) {
  if (k == 0 || n_per == 0) throw ConfigError("synth_planted: k and n_per must be positive");
  if (k > m) {
    throw ConfigError("synth_planted: " + std::to_string(k) + " feature blocks do not fit in " +
                      std::to_string(m) + " features");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("synth_planted: noise must be >= 0");

  const std::size_t block = m / k;
  const std::size_t n = k * n_per;
  Rng rng(seed);
  Matrix w(m, k);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t i = c * block; i < (c + 1) * block; ++i) w(i, c) = rng.uniform_open_closed(0.5, 1.5);
  Labels labels(n);
  std::vector<double> weight(n);
  for (std::size_t j = 0; j < n; ++j) {
    labels[j] = j / n_per;
    weight[j] = rng.uniform_open_closed(0.5, 1.5);
  }
  Matrix x(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = w(i, labels[j]) * weight[j];
      if (noise > 0.0) v += noise * std::abs(rng.normal());
      x(i, j) = v;
    }
  }
  return {NonnegMatrix(std::move(x)), std::move(labels),
          "planted-k" + std::to_string(k) + "-n" + std::to_string(n_per) + "-m" + std::to_string(m)};
}

void save_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);
  save_matrix(dir / "X.mat", data.x);
  if (data.labels) save_labels(dir / "labels.txt", *data.labels);
}

Dataset load_dataset(const fs::path& path) {
  if (fs::is_directory(path)) {
    if (!fs::exists(path / "X.mat")) throw InvalidData(path.string() + ": no X.mat in dataset directory");
    Dataset data{load_matrix(path / "X.mat"), std::nullopt, path.filename().string()};
    if (fs::exists(path / "labels.txt")) {
      Labels labels = load_labels(path / "labels.txt");
      if (labels.size() != data.x.cols()) {
        throw InvalidData(path.string() + ": labels.txt has " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(data.x.cols()) + " samples");
      }
      data.labels = std::move(labels);
    }
    return data;
  }
  if (!fs::exists(path)) throw InvalidData(path.string() + ": dataset not found");
  return {load_matrix(path), std::nullopt, path.stem().string()};
}

void save_model(const fs::path& dir, const DeepModel& model) {
  fs::create_directories(dir);
  {
    auto meta = open_out(dir / "meta", std::ios::out | std::ios::binary);
    meta << "layers " << model.depth() << '\n';
    meta << "sizes";
    for (std::size_t d : model.spec.sizes) meta << ' ' << d;
    meta << "\nlambdas";
    for (double l : model.spec.lambdas) meta << ' ' << format_double(l);
    meta << "\niterations " << model.iters_run << '\n';
    meta << "final_cost " << format_double(model.final_cost) << '\n';
    if (!meta) throw InvalidData("failed writing " + (dir / "meta").string());
  }
  save_matrix(dir / "W1.mat", model.w1);
  for (std::size_t l = 0; l < model.depth(); ++l) {
    save_matrix(dir / ("H" + std::to_string(l + 1) + ".mat"), model.hs[l]);
  }
}

DeepModel load_model(const fs::path& dir) {
  auto meta = open_in(dir / "meta");
  DeepModel model;
  std::size_t layers = 0;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "layers") {
      fields >> layers;
    } else if (key == "sizes") {
      std::size_t d = 0;
      while (fields >> d) model.spec.sizes.push_back(d);
    } else if (key == "lambdas") {
      std::string token;
      while (fields >> token) {
        double v = 0.0;
        if (!parse_double(token, v)) throw InvalidData((dir / "meta").string() + ": bad lambda");
        model.spec.lambdas.push_back(v);
      }
    } else if (key == "iterations") {
      fields >> model.iters_run;
    } else if (key == "final_cost") {
      std::string token;
      fields >> token;
      if (!parse_double(token, model.final_cost)) throw InvalidData((dir / "meta").string() + ": bad final_cost");
    }
  }
  if (layers == 0 || model.spec.sizes.size() != layers) {
    throw InvalidData((dir / "meta").string() + ": inconsistent layer description");
  }
  model.w1 = load_matrix(dir / "W1.mat");
  for (std::size_t l = 0; l < layers; ++l) {
    model.hs.push_back(load_matrix(dir / ("H" + std::to_string(l + 1) + ".mat")));
  }
  return model;
}

}  // namespace daonmf
