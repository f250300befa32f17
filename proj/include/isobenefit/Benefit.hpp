#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isobenefit/Errors.hpp"
#include "isobenefit/Grid.hpp"
#include "isobenefit/Numeric.hpp"

namespace isobenefit {

enum class DecayFamily : std::uint8_t { LinearCutoff, Exponential, InversePower };

/// Point source of (dis)amenity. Positive attractiveness is an amenity,
/// negative a disamenity, zero a neutral point that contributes nothing.
struct AmenityKernel {
  Coord location;
  double attractiveness = 1.0;
  double radius_m = 1.0;
  DecayFamily decay = DecayFamily::LinearCutoff;
  double power = 2.0;  // shape parameter for InversePower, > 0
};

/// Decay weight at a given distance; 1 at distance 0, non-increasing.
/// LinearCutoff is exactly zero at and beyond the radius.
inline double kernel_value(const AmenityKernel& kernel, double distance_m) {
  if (distance_m < 0.0) {
    throw ParamError("kernel distance must be non-negative, got " + std::to_string(distance_m));
  }
  if (!(kernel.radius_m > 0.0)) {
    throw ParamError("kernel radius must be positive, got " + std::to_string(kernel.radius_m));
  }
  double decay = 0.0;
  switch (kernel.decay) {
    case DecayFamily::LinearCutoff:
      decay = std::max(0.0, 1.0 - distance_m / kernel.radius_m);
      break;
    case DecayFamily::Exponential:
      decay = std::exp(-distance_m / kernel.radius_m);
      break;
    case DecayFamily::InversePower:
      if (!(kernel.power > 0.0)) {
        throw ParamError("inverse-power shape must be positive, got " + std::to_string(kernel.power));
      }
      decay = 1.0 / (1.0 + std::pow(distance_m / kernel.radius_m, kernel.power));
      break;
  }
  return kernel.attractiveness * decay;
}

enum class DistanceMode : std::uint8_t {
  StraightLine,    // Euclidean center-to-center, in meters
  WalkTimeScaled,  // 8-connected shortest-path length, in meters
};

struct BenefitField {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  // Exact per-cell accumulation backing `values` (Shewchuk partials, flat
  // layout). benefit_field fills it; hand-built fields may leave it empty.
  // It is what lets disjoint field sums reproduce the combined field
  // bit-for-bit even under cancellation.
  std::vector<double> exact_partials;
  std::vector<std::uint32_t> exact_offsets;

  bool has_exact() const { return !exact_offsets.empty(); }

  double at(int row, int col) const { return values[static_cast<std::size_t>(row * width + col)]; }
  double at(Coord c) const { return at(c.row, c.col); }
};

namespace detail {

inline void freeze_exact(BenefitField& field, const std::vector<ExactSum>& sums) {
  field.values.resize(sums.size());
  field.exact_offsets.assign(1, 0);
  field.exact_partials.clear();
  for (std::size_t i = 0; i < sums.size(); ++i) {
    field.values[i] = sums[i].value();
    const auto& parts = sums[i].partials();
    field.exact_partials.insert(field.exact_partials.end(), parts.begin(), parts.end());
    field.exact_offsets.push_back(static_cast<std::uint32_t>(field.exact_partials.size()));
  }
}

}  // namespace detail

/// Adds two fields cellwise. When both operands carry their exact
/// accumulations the sum is computed exactly and rounded once, so adding the
/// fields of two disjoint kernel lists reproduces the combined field.
inline BenefitField add_fields(const BenefitField& a, const BenefitField& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ParamError("benefit field dimensions differ");
  }
  BenefitField out;
  out.width = a.width;
  out.height = a.height;
  if (a.has_exact() && b.has_exact()) {
    std::vector<ExactSum> sums(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      for (std::uint32_t j = a.exact_offsets[i]; j < a.exact_offsets[i + 1]; ++j) {
        sums[i].add(a.exact_partials[j]);
      }
      for (std::uint32_t j = b.exact_offsets[i]; j < b.exact_offsets[i + 1]; ++j) {
        sums[i].add(b.exact_partials[j]);
      }
    }
    detail::freeze_exact(out, sums);
    return out;
  }
  out.values = a.values;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

namespace detail {

inline double euclid_meters(Coord a, Coord b, double cell_size_m) {
  const double dr = static_cast<double>(a.row - b.row);
  const double dc = static_cast<double>(a.col - b.col);
  return std::sqrt(dr * dr + dc * dc) * cell_size_m;
}

}  // namespace detail

/// Superposes all kernels into a per-cell benefit field. Per-cell sums use
/// correctly-rounded accumulation, so the result is independent of kernel
/// order and splitting a kernel list sums to the combined field.
inline BenefitField benefit_field(const Grid& grid, const std::vector<AmenityKernel>& kernels,
                                  DistanceMode mode = DistanceMode::StraightLine) {
  for (const AmenityKernel& k : kernels) {
    if (!grid.in_bounds(k.location)) {
      throw ParamError("kernel location (" + std::to_string(k.location.row) + "," +
                       std::to_string(k.location.col) + ") outside grid");
    }
    if (!(k.radius_m > 0.0)) {
      throw ParamError("kernel radius must be positive, got " + std::to_string(k.radius_m));
    }
  }

  const std::size_t n = grid.cell_count();
  std::vector<ExactSum> sums(n);

  for (const AmenityKernel& k : kernels) {
    if (mode == DistanceMode::WalkTimeScaled) {
      std::vector<std::uint8_t> src(n, 0);
      src[static_cast<std::size_t>(grid.index(k.location))] = 1;
      const auto pairs = exact_grid_distances(grid.width, grid.height, src);
      const auto meters = materialize_steps(pairs, grid.cell_size_m,
                                            grid.cell_size_m * std::numbers::sqrt2_v<double>);
      for (std::size_t i = 0; i < n; ++i) sums[i].add(kernel_value(k, meters[i]));
      continue;
    }
    // Straight-line mode. A LinearCutoff kernel is exactly zero outside its
    // radius, so only the cells inside the bounding window can contribute.
    int r0 = 0, r1 = grid.height - 1, c0 = 0, c1 = grid.width - 1;
    if (k.decay == DecayFamily::LinearCutoff) {
      const int reach = static_cast<int>(k.radius_m / grid.cell_size_m) + 1;
      r0 = std::max(0, k.location.row - reach);
      r1 = std::min(grid.height - 1, k.location.row + reach);
      c0 = std::max(0, k.location.col - reach);
      c1 = std::min(grid.width - 1, k.location.col + reach);
    }
    for (int row = r0; row <= r1; ++row) {
      for (int col = c0; col <= c1; ++col) {
        const double d = detail::euclid_meters(Coord{row, col}, k.location, grid.cell_size_m);
        const double v = kernel_value(k, d);
        if (v != 0.0) sums[static_cast<std::size_t>(grid.index(row, col))].add(v);
      }
    }
  }

  BenefitField field;
  field.width = grid.width;
  field.height = grid.height;
  detail::freeze_exact(field, sums);
  return field;
}

/// Dispersion statistics over the masked cells. CV is population stddev over
/// mean and is only defined for a positive mean.
struct BenefitStats {
  bool empty_mask = true;
  int cell_count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::optional<double> coefficient_of_variation;
};

inline BenefitStats benefit_stats(const BenefitField& field, const Grid& grid,
                                  const std::function<bool(CellState)>& mask) {
  if (field.width != grid.width || field.height != grid.height) {
    throw ParamError("benefit field dimensions do not match grid");
  }
  BenefitStats stats;
  // Welford running moments.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (!mask(grid.cells[i])) continue;
    const double x = field.values[i];
    if (stats.empty_mask) {
      stats.empty_mask = false;
      stats.min = x;
      stats.max = x;
    } else {
      stats.min = std::min(stats.min, x);
      stats.max = std::max(stats.max, x);
    }
    stats.cell_count += 1;
    const double delta = x - mean;
    mean += delta / static_cast<double>(stats.cell_count);
    m2 += delta * (x - mean);
  }
  if (stats.empty_mask) return stats;
  stats.mean = mean;
  if (mean > 0.0) {
    const double variance = m2 / static_cast<double>(stats.cell_count);
    stats.coefficient_of_variation = std::sqrt(variance) / mean;
  }
  return stats;
}

inline bool mask_dwellers(CellState s) { return is_settlement(s); }
inline bool mask_all(CellState) { return true; }

/// Outcome of the constancy band test: minimum level and dispersion.
struct BandCheck {
  bool passed = false;
  bool vacuous = false;  // empty mask; passes with a warning
  double min = 0.0;
  double mean = 0.0;
  std::optional<double> cv;
};

/// min >= c_star and CV <= epsilon_cv. An empty mask passes vacuously.
inline BandCheck isobenefit_check(const BenefitStats& stats, double c_star, double epsilon_cv) {
  if (epsilon_cv < 0.0) {
    throw ParamError("epsilon_cv must be non-negative, got " + std::to_string(epsilon_cv));
  }
  BandCheck check;
  if (stats.empty_mask) {
    check.passed = true;
    check.vacuous = true;
    return check;
  }
  check.min = stats.min;
  check.mean = stats.mean;
  check.cv = stats.coefficient_of_variation;
  const bool min_ok = stats.min >= c_star;
  const bool cv_ok = stats.coefficient_of_variation.has_value() &&
                     *stats.coefficient_of_variation <= epsilon_cv;
  check.passed = min_ok && cv_ok;
  return check;
}

}  // namespace isobenefit
