#include "dmac/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace dmac {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'D', 'M', 'X', '1'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const fs::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw LoadError(path.string() + ": truncated DMX1 file");
  return to_little(v);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view tok, const fs::path& path, std::size_t line) {
  const std::string t = trim(tok);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw LoadError(path.string() + ":" + std::to_string(line) + ": bad number '" + t + "'");
  return v;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

} // namespace

std::vector<std::size_t> MultiViewDataset::view_dims() const {
  std::vector<std::size_t> d;
  for (const auto& v : views)
    d.push_back(v.cols());
  return d;
}

void MultiViewDataset::validate() const {
  if (views.empty())
    throw LoadError("dataset has no views");
  const std::size_t n = samples();
  for (std::size_t a = 0; a < views.size(); ++a)
    if (views[a].rows() != n)
      throw LoadError("row-count mismatch: view 0 has " + std::to_string(n) + " rows, view " +
                      std::to_string(a) + " has " + std::to_string(views[a].rows()));
  if (clusters < 2)
    throw LoadError("cluster count must be at least 2");
  if (labels) {
    if (labels->size() != n)
      throw LoadError("labels length " + std::to_string(labels->size()) + " != n = " +
                      std::to_string(n));
    for (std::size_t i = 0; i < labels->size(); ++i) {
      const int l = (*labels)[i];
      if (l < 0 || static_cast<std::size_t>(l) >= clusters)
        throw LoadError("label " + std::to_string(l) + " at sample " + std::to_string(i) +
                        " outside [0, " + std::to_string(clusters) + ")");
    }
  }
}

NormalizedRows l2_normalize_rows(const Matrix& x) {
  NormalizedRows out{x, {}};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = out.matrix.row(i);
    double s = 0.0;
    for (double v : r)
      s += v * v;
    if (s == 0.0) {
      out.zero_rows.push_back(i);
      continue;
    }
    const double norm = std::sqrt(s);
    for (double& v : r)
      v /= norm;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Matrix read_csv_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw LoadError("missing view file " + path.string());
  std::vector<double> data;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      data.push_back(parse_double(rest.substr(0, comma), path, lineno));
      ++count;
      if (comma == std::string_view::npos)
        break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0)
      cols = count;
    else if (count != cols)
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(cols) + " columns, found " + std::to_string(count));
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

Matrix read_dmx_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw LoadError("missing view file " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw LoadError(path.string() + ": not a DMX1 file");
  const auto rows = get<std::uint64_t>(in, path);
  const auto cols = get<std::uint64_t>(in, path);
  std::vector<double> data(rows * cols);
  for (auto& v : data)
    v = get<double>(in, path);
  return Matrix(rows, cols, std::move(data));
}

Matrix read_matrix(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv")
    return read_csv_matrix(path);
  if (ext == ".dmx")
    return read_dmx_matrix(path);
  throw LoadError("unknown matrix file extension '" + ext + "' for " + path.string());
}

void write_csv_matrix(const fs::path& path, const Matrix& m) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j)
        out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out)
    throw std::runtime_error("failed writing " + path.string());
}

void write_dmx_matrix(const fs::path& path, const Matrix& m) {
  auto out = open_out(path, std::ios::binary);
  out.write(kMagic, 4);
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  for (double v : m.data())
    put<double>(out, v);
  if (!out)
    throw std::runtime_error("failed writing " + path.string());
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw LoadError("missing labels file " + path.string());
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty())
      continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": bad label '" + t + "'");
    labels.push_back(v);
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int l : labels)
    out << l << '\n';
  if (!out)
    throw std::runtime_error("failed writing " + path.string());
}

MultiViewDataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in)
    throw LoadError("missing manifest " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(manifest_path.string() + ": " + e.what());
  }

  MultiViewDataset ds;
  std::size_t n = 0, v = 0;
  try {
    n = manifest.at("n").get<std::size_t>();
    v = manifest.at("v").get<std::size_t>();
    ds.clusters = manifest.at("c").get<std::size_t>();
    const auto files = manifest.at("views").get<std::vector<std::string>>();
    if (files.size() != v)
      throw LoadError("manifest lists " + std::to_string(files.size()) + " view files but v = " +
                      std::to_string(v));
    for (const auto& f : files)
      ds.views.push_back(read_matrix(dir / f));
    if (manifest.contains("labels") && !manifest["labels"].is_null())
      ds.labels = read_labels(dir / manifest["labels"].get<std::string>());
    if (manifest.value("normalize", false)) {
      for (std::size_t a = 0; a < ds.views.size(); ++a) {
        auto norm = l2_normalize_rows(ds.views[a]);
        if (!norm.zero_rows.empty())
          ds.warnings.push_back("view " + std::to_string(a) + ": " +
                                std::to_string(norm.zero_rows.size()) +
                                " zero rows left unnormalized");
        ds.views[a] = std::move(norm.matrix);
      }
    }
  } catch (const json::exception& e) {
    throw LoadError(manifest_path.string() + ": " + e.what());
  }
  ds.validate();
  if (ds.samples() != n)
    throw LoadError("manifest n = " + std::to_string(n) + " but views have " +
                    std::to_string(ds.samples()) + " rows");
  return ds;
}

void save_dataset(const MultiViewDataset& ds, const fs::path& dir, ViewFormat format,
                  bool normalize_on_load) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  json manifest;
  manifest["n"] = ds.samples();
  manifest["v"] = ds.view_count();
  manifest["c"] = ds.clusters;
  std::vector<std::string> files;
  for (std::size_t a = 0; a < ds.views.size(); ++a) {
    const std::string name =
        "view" + std::to_string(a) + (format == ViewFormat::csv ? ".csv" : ".dmx");
    if (format == ViewFormat::csv)
      write_csv_matrix(dir / name, ds.views[a]);
    else
      write_dmx_matrix(dir / name, ds.views[a]);
    files.push_back(name);
  }
  manifest["views"] = files;
  manifest["normalize"] = normalize_on_load;
  if (ds.labels) {
    write_labels(dir / "labels.txt", *ds.labels);
    manifest["labels"] = "labels.txt";
  }
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out)
    throw std::runtime_error("failed writing manifest in " + dir.string());
}

void SyntheticSpec::validate() const {
  if (clusters < 2)
    throw std::invalid_argument("clusters must be at least 2");
  if (samples < clusters)
    throw std::invalid_argument("samples must be at least clusters");
  if (views < 1)
    throw std::invalid_argument("views must be at least 1");
  if (dims.empty() || (dims.size() != 1 && dims.size() != views))
    throw std::invalid_argument("dims must have one entry or one per view");
  for (auto d : dims)
    if (d == 0)
      throw std::invalid_argument("dims must be positive");
  if (!(spread > 0.0))
    throw std::invalid_argument("spread must be positive");
  if (!(noise >= 0.0))
    throw std::invalid_argument("noise must be nonnegative");
}

std::size_t SyntheticSpec::dim_of(std::size_t view) const {
  return dims.size() == 1 ? dims.front() : dims.at(view);
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<int> labels(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i)
    labels[i] = static_cast<int>(i % spec.clusters);
  std::shuffle(labels.begin(), labels.end(), rng);

  MultiViewDataset ds;
  ds.clusters = spec.clusters;
  for (std::size_t a = 0; a < spec.views; ++a) {
    const std::size_t d = spec.dim_of(a);
    Matrix centers(spec.clusters, d);
    for (double& x : centers.data())
      x = spec.spread * normal(rng);
    Matrix x(spec.samples, d);
    for (std::size_t i = 0; i < spec.samples; ++i) {
      auto c = centers.row(static_cast<std::size_t>(labels[i]));
      auto r = x.row(i);
      for (std::size_t j = 0; j < d; ++j)
        r[j] = c[j] + spec.noise * normal(rng);
    }
    ds.views.push_back(std::move(x));
  }
  ds.labels = std::move(labels);
  return ds;
}

} // namespace dmac
