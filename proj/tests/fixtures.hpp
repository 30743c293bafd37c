#pragma once
// Small builders shared by the unit tests.

#include <catch_amalgamated.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/spectral_library.hpp"

namespace fixture {

using namespace spectral_mcl;

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

/// n spectra of 16 bins, each a distinct bump on a small floor.
inline SpectralLibrary bump_library(std::size_t n) {
  SpectralLibrary lib;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(16, 0.05);
    v[(3 * k) % 16] += 1.0;
    v[(3 * k + 1) % 16] += 0.5;
    v[(5 * k + 7) % 16] += 0.25;
    lib.add("m" + std::to_string(k), Spectrum(0.0, 1.0, std::move(v)));
  }
  return lib;
}

/// Rows listed top first. '.' free, '?' unknown, digit = occupied with that
/// material id, '#' = occupied with material 0.
inline MaterialMap ascii_map(const std::vector<std::string>& rows, double resolution = 0.05,
                             SpectralLibrary lib = bump_library(4), Pose2 origin = {}) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  std::vector<Occupancy> occ(static_cast<std::size_t>(w * h), Occupancy::Free);
  std::vector<std::int32_t> mat(occ.size(), kNoMaterial);
  for (int r = 0; r < h; ++r) {
    const int j = h - 1 - r;
    for (int i = 0; i < w; ++i) {
      const char c = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
      const auto k = static_cast<std::size_t>(j * w + i);
      if (c == '?') {
        occ[k] = Occupancy::Unknown;
      } else if (c == '#' || (c >= '0' && c <= '9')) {
        occ[k] = Occupancy::Occupied;
        mat[k] = c == '#' ? 0 : c - '0';
      }
    }
  }
  return MaterialMap(w, h, resolution, origin, std::move(occ), std::move(mat), std::move(lib));
}

/// Square room of side n with a one-cell wall of material 0.
inline MaterialMap box_map(int n, double resolution = 0.05) {
  std::vector<std::string> rows(static_cast<std::size_t>(n), std::string(static_cast<std::size_t>(n), '.'));
  for (int k = 0; k < n; ++k) {
    rows.front()[static_cast<std::size_t>(k)] = rows.back()[static_cast<std::size_t>(k)] = '#';
    rows[static_cast<std::size_t>(k)].front() = rows[static_cast<std::size_t>(k)].back() = '#';
  }
  return ascii_map(rows, resolution);
}

}  // namespace fixture
