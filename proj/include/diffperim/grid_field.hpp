#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <vector>

#include "diffperim/error.hpp"

namespace diffperim {

/// How lattice values relate to the continuum function they stand for.
enum class Sampling {
  CellAverage,  // piecewise constant on cells (raster output)
  Point,        // point samples of a band-limited periodic function
};

/// Values on a periodic rectangular lattice over [0, box_0) x ... x [0, box_{n-1}).
/// Axes beyond `n` have extent 1. Storage is row-major, last axis fastest.
struct GridField {
  int n = 2;
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> box{1.0, 1.0, 1.0};
  std::vector<double> values;
  Sampling sampling = Sampling::CellAverage;
  /// Largest amount by which a value had to be clamped into [0, 1].
  double clamp_excess = 0.0;

  GridField() = default;
  GridField(int dim, std::array<int, 3> cells, std::array<double, 3> lengths, double fill = 0.0)
      : n(dim), shape(cells), box(lengths) {
    if (dim < 1 || dim > 3) throw Error(ErrorKind::InvalidArgument, "set_geometry", "dimension must be 1, 2 or 3");
    for (int i = dim; i < 3; ++i) {
      shape[i] = 1;
      box[i] = 1.0;
    }
    values.assign(size(), fill);
  }

  std::size_t size() const {
    return static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]) *
           static_cast<std::size_t>(shape[2]);
  }
  double spacing(int axis) const { return box[axis] / shape[axis]; }
  double max_spacing() const {
    double h = 0.0;
    for (int i = 0; i < n; ++i) h = std::max(h, spacing(i));
    return h;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= spacing(i);
    return v;
  }
  double domain_volume() const {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= box[i];
    return v;
  }
  std::size_t index(int i, int j = 0, int k = 0) const {
    return (static_cast<std::size_t>(i) * shape[1] + static_cast<std::size_t>(j)) * shape[2] +
           static_cast<std::size_t>(k);
  }
  double center(int axis, int cell) const { return (cell + 0.5) * spacing(axis); }
  double mean() const {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  }
  /// Integral of the represented function over the domain.
  double integral() const { return mean() * domain_volume(); }

  bool same_grid(const GridField& other) const {
    return n == other.n && shape == other.shape && box == other.box;
  }
};

}  // namespace diffperim
