#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/pose.hpp"
#include "spectral_mcl/spectral_library.hpp"
#include "spectral_mcl/text_io.hpp"

namespace spectral_mcl {

enum class Occupancy : std::uint8_t { Free, Occupied, Unknown };

struct Cell {
  int i = 0;  // column, along the map x axis
  int j = 0;  // row, along the map y axis
  friend bool operator==(const Cell&, const Cell&) = default;
};

inline constexpr std::int32_t kNoMaterial = -1;

/// Occupancy grid whose occupied cells carry a library spectrum id.
/// Cell (0, 0) has its lower-left corner at `origin`.
class MaterialMap {
 public:
  MaterialMap(int width, int height, double resolution, Pose2 origin, std::vector<Occupancy> occupancy,
              std::vector<std::int32_t> materials, SpectralLibrary library)
      : width_(width),
        height_(height),
        resolution_(resolution),
        origin_(origin),
        occupancy_(std::move(occupancy)),
        materials_(std::move(materials)),
        library_(std::move(library)) {
    if (width_ <= 0 || height_ <= 0) throw Error(ErrorKind::MapMismatch, "map dimensions must be positive");
    if (!(resolution_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "map resolution must be positive");
    const auto n = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    if (occupancy_.size() != n || materials_.size() != n) {
      throw Error(ErrorKind::MapMismatch, "occupancy and material layers must match the map dimensions");
    }
    for (std::size_t k = 0; k < n; ++k) {
      const Cell c{static_cast<int>(k % static_cast<std::size_t>(width_)),
                   static_cast<int>(k / static_cast<std::size_t>(width_))};
      const std::string at = "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
      if (occupancy_[k] == Occupancy::Occupied) {
        if (materials_[k] == kNoMaterial) {
          throw Error(ErrorKind::UnknownMaterial, "occupied cell " + at + " has no material");
        }
        if (materials_[k] < 0 || static_cast<std::size_t>(materials_[k]) >= library_.size()) {
          throw Error(ErrorKind::UnknownMaterial,
                      "cell " + at + " references material " + std::to_string(materials_[k]) +
                          " missing from the library");
        }
      } else if (materials_[k] != kNoMaterial) {
        throw Error(ErrorKind::MapMismatch, "non-occupied cell " + at + " carries a material id");
      }
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  const Pose2& origin() const noexcept { return origin_; }
  const SpectralLibrary& library() const noexcept { return library_; }
  std::size_t cell_count() const noexcept { return occupancy_.size(); }

  bool in_bounds(Cell c) const noexcept { return c.i >= 0 && c.j >= 0 && c.i < width_ && c.j < height_; }
  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.j) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.i);
  }
  Cell cell_at(std::size_t index) const noexcept {
    return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
  }

  Occupancy occupancy(Cell c) const { return occupancy_[index(c)]; }
  std::optional<std::size_t> material(Cell c) const {
    const auto m = materials_[index(c)];
    if (m == kNoMaterial) return std::nullopt;
    return static_cast<std::size_t>(m);
  }
  const std::vector<Occupancy>& occupancy_layer() const noexcept { return occupancy_; }
  const std::vector<std::int32_t>& material_layer() const noexcept { return materials_; }

  /// World point in continuous grid units (cell (i, j) spans [i, i+1) x [j, j+1)).
  void world_to_grid(double wx, double wy, double& gx, double& gy) const noexcept {
    const double c = std::cos(origin_.theta), s = std::sin(origin_.theta);
    const double ex = wx - origin_.x, ey = wy - origin_.y;
    gx = (c * ex + s * ey) / resolution_;
    gy = (-s * ex + c * ey) / resolution_;
  }

  void grid_to_world(double gx, double gy, double& wx, double& wy) const noexcept {
    const double c = std::cos(origin_.theta), s = std::sin(origin_.theta);
    const double lx = gx * resolution_, ly = gy * resolution_;
    wx = origin_.x + c * lx - s * ly;
    wy = origin_.y + s * lx + c * ly;
  }

  std::optional<Cell> cell_of(double wx, double wy) const noexcept {
    double gx = 0.0, gy = 0.0;
    world_to_grid(wx, wy, gx, gy);
    if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= width_ || gy >= height_) return std::nullopt;
    return Cell{static_cast<int>(gx), static_cast<int>(gy)};
  }

  Pose2 cell_center(Cell c) const {
    double wx = 0.0, wy = 0.0;
    grid_to_world(c.i + 0.5, c.j + 0.5, wx, wy);
    return Pose2(wx, wy, 0.0);
  }

  bool is_free(double wx, double wy) const {
    const auto c = cell_of(wx, wy);
    return c && occupancy(*c) == Occupancy::Free;
  }

  std::size_t count(Occupancy state) const {
    std::size_t n = 0;
    for (Occupancy o : occupancy_) n += (o == state);
    return n;
  }

  friend bool operator==(const MaterialMap&, const MaterialMap&) = default;

 private:
  int width_;
  int height_;
  double resolution_;
  Pose2 origin_;
  std::vector<Occupancy> occupancy_;
  std::vector<std::int32_t> materials_;
  SpectralLibrary library_;
};

// ---------------------------------------------------------------------------
// Occupancy images (8-bit PGM). Image row 0 is the top of the map (max j).

struct GrayImage {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 at the top
};

inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open occupancy image " + path);
  auto next_token = [&]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw Error(ErrorKind::ParseError, path + ": truncated PGM header");
  };
  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") throw Error(ErrorKind::ParseError, path + ": not a PGM image");
  GrayImage img;
  img.width = static_cast<int>(parse_size(next_token(), path));
  img.height = static_cast<int>(parse_size(next_token(), path));
  img.max_value = static_cast<int>(parse_size(next_token(), path));
  if (img.max_value <= 0 || img.max_value > 255) {
    throw Error(ErrorKind::ParseError, path + ": only 8-bit PGM images are supported");
  }
  const auto n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.resize(n);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) throw Error(ErrorKind::ParseError, path + ": truncated pixels");
  } else {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(parse_size(next_token(), path));
  }
  return img;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write image " + path);
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.max_value << '\n';
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline constexpr double kOccupiedThreshold = 0.196;  // pixel < 0.196 * max -> occupied
inline constexpr double kFreeThreshold = 0.65;       // pixel > 0.65 * max -> free

inline Occupancy classify_pixel(int value, int max_value) {
  if (value < kOccupiedThreshold * max_value) return Occupancy::Occupied;
  if (value > kFreeThreshold * max_value) return Occupancy::Free;
  return Occupancy::Unknown;
}

// ---------------------------------------------------------------------------
// Map loading and saving

struct MapGeometry {
  double resolution = 0.05;
  Pose2 origin{};
};

/// Material index CSV: optional header, then `i,j,material_id` per occupied cell.
inline std::vector<std::int32_t> read_material_index(const std::string& path, int width, int height) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open material index " + path);
  std::vector<std::int32_t> materials(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                                      kNoMaterial);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line_no == 1 && line.find_first_of("0123456789") != 0) continue;  // header
    const auto f = split(line, ',');
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != 3) throw Error(ErrorKind::ParseError, where + ": expected i,j,material_id");
    const auto i = static_cast<long>(parse_size(f[0], where));
    const auto j = static_cast<long>(parse_size(f[1], where));
    const auto m = parse_size(f[2], where);
    if (i >= width || j >= height) {
      throw Error(ErrorKind::MapMismatch, where + ": cell outside the occupancy image");
    }
    materials[static_cast<std::size_t>(j) * static_cast<std::size_t>(width) + static_cast<std::size_t>(i)] =
        static_cast<std::int32_t>(m);
  }
  return materials;
}

inline MaterialMap load_map(const std::string& occupancy_image_path, const std::string& material_index_path,
                            const std::string& library_path, const MapGeometry& geometry = {}) {
  const GrayImage img = read_pgm(occupancy_image_path);
  SpectralLibrary library = load_library(library_path);
  std::vector<std::int32_t> materials = read_material_index(material_index_path, img.width, img.height);
  std::vector<Occupancy> occupancy(img.pixels.size());
  for (int r = 0; r < img.height; ++r) {
    const int j = img.height - 1 - r;
    for (int i = 0; i < img.width; ++i) {
      occupancy[static_cast<std::size_t>(j) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(i)] =
          classify_pixel(img.pixels[static_cast<std::size_t>(r) * static_cast<std::size_t>(img.width) +
                                    static_cast<std::size_t>(i)],
                         img.max_value);
    }
  }
  return MaterialMap(img.width, img.height, geometry.resolution, geometry.origin, std::move(occupancy),
                     std::move(materials), std::move(library));
}

struct MapFiles {
  std::string occupancy = "occupancy.pgm";
  std::string materials = "materials.csv";
  std::string library = "library.txt";
};

inline constexpr const char* kMapMetadataName = "map.txt";

/// Metadata file with `key value` lines: resolution, origin_x, origin_y,
/// origin_theta, occupancy, materials, library. Component paths are relative
/// to the metadata file. A directory argument resolves to its map.txt.
inline MaterialMap load_map(const std::string& metadata_path_or_dir) {
  namespace fs = std::filesystem;
  fs::path meta(metadata_path_or_dir);
  if (fs::is_directory(meta)) meta /= kMapMetadataName;
  std::ifstream in(meta);
  if (!in) throw Error(ErrorKind::IoError, "cannot open map metadata " + meta.string());
  MapGeometry geometry;
  MapFiles files;
  double ox = 0.0, oy = 0.0, ot = 0.0;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto space = t.find_first_of(" \t");
    const std::string key(t.substr(0, space));
    const std::string value(space == std::string_view::npos ? std::string_view{} : trim(t.substr(space)));
    const std::string where = meta.string();
    if (key == "resolution") geometry.resolution = parse_double(value, where);
    else if (key == "origin_x") ox = parse_double(value, where);
    else if (key == "origin_y") oy = parse_double(value, where);
    else if (key == "origin_theta") ot = parse_double(value, where);
    else if (key == "occupancy") files.occupancy = value;
    else if (key == "materials") files.materials = value;
    else if (key == "library") files.library = value;
    else throw Error(ErrorKind::ParseError, where + ": unknown key '" + key + "'");
  }
  geometry.origin = Pose2(ox, oy, ot);
  const fs::path base = meta.parent_path();
  auto resolve = [&](const std::string& p) { return (fs::path(p).is_absolute() ? fs::path(p) : base / p).string(); };
  return load_map(resolve(files.occupancy), resolve(files.materials), resolve(files.library), geometry);
}

inline GrayImage occupancy_image(const MaterialMap& map) {
  GrayImage img;
  img.width = map.width();
  img.height = map.height();
  img.max_value = 255;
  img.pixels.resize(map.cell_count());
  for (int j = 0; j < map.height(); ++j) {
    const int r = map.height() - 1 - j;
    for (int i = 0; i < map.width(); ++i) {
      std::uint8_t v = 128;
      switch (map.occupancy({i, j})) {
        case Occupancy::Occupied: v = 0; break;
        case Occupancy::Free: v = 255; break;
        case Occupancy::Unknown: v = 128; break;
      }
      img.pixels[static_cast<std::size_t>(r) * static_cast<std::size_t>(map.width()) + static_cast<std::size_t>(i)] = v;
    }
  }
  return img;
}

/// Writes map.txt plus the three component files into `dir`.
inline void save_map(const std::string& dir, const MaterialMap& map) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const MapFiles files;
  write_pgm((fs::path(dir) / files.occupancy).string(), occupancy_image(map));
  {
    std::ofstream out(fs::path(dir) / files.materials);
    if (!out) throw Error(ErrorKind::IoError, "cannot write material index in " + dir);
    out << "i,j,material_id\n";
    for (std::size_t k = 0; k < map.cell_count(); ++k) {
      const Cell c = map.cell_at(k);
      if (const auto m = map.material(c)) out << c.i << ',' << c.j << ',' << *m << '\n';
    }
  }
  save_library((fs::path(dir) / files.library).string(), map.library());
  std::ofstream meta(fs::path(dir) / kMapMetadataName);
  if (!meta) throw Error(ErrorKind::IoError, "cannot write map metadata in " + dir);
  meta << "resolution " << format_double(map.resolution()) << '\n'
       << "origin_x " << format_double(map.origin().x) << '\n'
       << "origin_y " << format_double(map.origin().y) << '\n'
       << "origin_theta " << format_double(map.origin().theta) << '\n'
       << "occupancy " << files.occupancy << '\n'
       << "materials " << files.materials << '\n'
       << "library " << files.library << '\n';
}

}  // namespace spectral_mcl
