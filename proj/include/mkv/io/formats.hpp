#pragma once

// Output formats: CSV with a config-hash comment line, the MKVH binary heat
// map, and a viridis-mapped binary PPM.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/observables.hpp"

namespace mkv::io {

static_assert(std::endian::native == std::endian::little, "MKVH writer assumes a little-endian host");

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open file for writing", path.string());
  return out;
}

/// Row-oriented CSV: '# config_hash=...' comment, header, rows.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view config_hash, const std::vector<std::string>& columns)
      : path_(path), out_(open_output(path)), width_(columns.size()) {
    out_ << "# config_hash=" << config_hash << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    if (sizeof...(Cells) != width_) throw IoError("CSV row width does not match the header", path_.string());
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    out_ << '\n';
    if (!out_) throw IoError("write failed", path_.string());
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw IoError("CSV row width does not match the header", path_.string());
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    if (!out_) throw IoError("write failed", path_.string());
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  template <class T>
  static std::string cell(const T& v) {
    return std::to_string(v);
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

/// Parsed CSV: comment lines, header and string cells.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("CSV has no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file for reading", path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size())
        throw ConfigError(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                          std::to_string(cells.size()) + " cells, header has " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ConfigError(path.string() + ": no header row");
  return t;
}

inline constexpr std::array<char, 4> kHeatMapMagic{'M', 'K', 'V', 'H'};
inline constexpr std::uint16_t kHeatMapVersion = 1;

namespace detail {
template <class T>
void put(std::ostream& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.write(b, sizeof(T));
}
template <class T>
T get(std::istream& in, const std::string& path) {
  char b[sizeof(T)];
  if (!in.read(b, sizeof(T))) throw IoError("truncated heat map", path);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
}  // namespace detail

/// "MKVH", u16 version, u64 rows, u64 cols, then rows*cols little-endian
/// f64 in row-major order.
inline void write_heatmap(const std::filesystem::path& path, const HeatMap& map) {
  auto out = open_output(path, true);
  out.write(kHeatMapMagic.data(), kHeatMapMagic.size());
  detail::put<std::uint16_t>(out, kHeatMapVersion);
  detail::put<std::uint64_t>(out, map.rows);
  detail::put<std::uint64_t>(out, map.cols);
  for (double v : map.values) detail::put<double>(out, v);
  if (!out) throw IoError("write failed", path.string());
}

inline HeatMap read_heatmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading", path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kHeatMapMagic) throw IoError("not an MKVH file", path.string());
  if (detail::get<std::uint16_t>(in, path.string()) != kHeatMapVersion)
    throw IoError("unsupported MKVH version", path.string());
  HeatMap map;
  map.rows = detail::get<std::uint64_t>(in, path.string());
  map.cols = detail::get<std::uint64_t>(in, path.string());
  map.values.resize(map.rows * map.cols);
  for (auto& v : map.values) v = detail::get<double>(in, path.string());
  return map;
}

/// Viridis, linearly interpolated between nine anchors; t is clamped to [0, 1].
inline std::array<std::uint8_t, 3> viridis(double t) {
  static constexpr std::array<std::array<double, 3>, 9> anchors{{{68, 1, 84},
                                                                  {71, 44, 122},
                                                                  {59, 81, 139},
                                                                  {44, 113, 142},
                                                                  {33, 144, 141},
                                                                  {39, 173, 129},
                                                                  {92, 200, 99},
                                                                  {170, 220, 50},
                                                                  {253, 231, 37}}};
  if (!(t >= 0.0)) t = 0.0;
  t = std::min(t, 1.0);
  const double pos = t * static_cast<double>(anchors.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), anchors.size() - 2);
  const double f = pos - static_cast<double>(i);
  std::array<std::uint8_t, 3> rgb{};
  for (std::size_t c = 0; c < 3; ++c)
    rgb[c] = static_cast<std::uint8_t>(std::lround(anchors[i][c] + f * (anchors[i + 1][c] - anchors[i][c])));
  return rgb;
}

/// Binary PPM of the heat map, time running down the rows, min..max mapped
/// through viridis.
inline void write_ppm(const std::filesystem::path& path, const HeatMap& map) {
  if (map.rows == 0 || map.cols == 0) throw IoError("empty heat map", path.string());
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it, span = *hi_it - *lo_it;
  auto out = open_output(path, true);
  out << "P6\n" << map.cols << ' ' << map.rows << "\n255\n";
  for (double v : map.values) {
    const auto rgb = viridis(span > 0.0 ? (v - lo) / span : 0.5);
    out.write(reinterpret_cast<const char*>(rgb.data()), 3);
  }
  if (!out) throw IoError("write failed", path.string());
}

}  // namespace mkv::io
