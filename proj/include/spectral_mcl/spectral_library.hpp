#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/spectrum.hpp"
#include "spectral_mcl/text_io.hpp"

namespace spectral_mcl {

/// Reference spectra indexed by dense material id.
struct SpectralLibrary {
  std::vector<std::string> names;
  std::vector<Spectrum> spectra;

  std::size_t size() const noexcept { return spectra.size(); }
  bool empty() const noexcept { return spectra.empty(); }
  const Spectrum& operator[](std::size_t id) const { return spectra.at(id); }

  void add(std::string name, Spectrum s) {
    if (name.find_first_of(",\n") != std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "library names may not contain commas or newlines");
    }
    if (!spectra.empty() && !spectra.front().comparable_with(s)) {
      throw Error(ErrorKind::GridMismatch, "library spectra must share one wavenumber grid");
    }
    names.push_back(std::move(name));
    spectra.push_back(std::move(s));
  }

  friend bool operator==(const SpectralLibrary&, const SpectralLibrary&) = default;
};

// File layout:
//   grid_start grid_step n_bins
//   id,name,i_0,i_1,...,i_{n-1}
inline void write_library(std::ostream& out, const SpectralLibrary& lib) {
  if (lib.empty()) throw Error(ErrorKind::InvalidArgument, "cannot write an empty library");
  const Spectrum& first = lib.spectra.front();
  out << format_double(first.grid_start()) << ' ' << format_double(first.grid_step()) << ' ' << first.size()
      << '\n';
  for (std::size_t id = 0; id < lib.size(); ++id) {
    out << id << ',' << lib.names[id];
    for (double v : lib.spectra[id].intensities()) out << ',' << format_double(v);
    out << '\n';
  }
}

inline SpectralLibrary read_library(std::istream& in, const std::string& origin = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, origin + ": missing library header");
  std::istringstream header(line);
  double grid_start = 0.0, grid_step = 0.0;
  std::size_t n_bins = 0;
  if (!(header >> grid_start >> grid_step >> n_bins)) {
    throw Error(ErrorKind::ParseError, origin + ": malformed header '" + line + "'");
  }
  SpectralLibrary lib;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, ',');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields.size() != n_bins + 2) {
      throw Error(ErrorKind::ParseError, where + ": expected " + std::to_string(n_bins + 2) + " fields");
    }
    if (parse_size(fields[0], where) != lib.size()) {
      throw Error(ErrorKind::ParseError, where + ": library ids must be dense and ordered from 0");
    }
    std::vector<double> values(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) values[i] = parse_double(fields[i + 2], where);
    lib.add(fields[1], Spectrum(grid_start, grid_step, std::move(values)));
  }
  return lib;
}

inline SpectralLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open library file " + path);
  return read_library(in, path);
}

inline void save_library(const std::string& path, const SpectralLibrary& lib) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write library file " + path);
  write_library(out, lib);
}

}  // namespace spectral_mcl
