#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "isobenefit/Benefit.hpp"
#include "isobenefit/Errors.hpp"
#include "isobenefit/Grid.hpp"
#include "isobenefit/Numeric.hpp"

namespace isobenefit {

/// Calibration constants for the urban-DNA checks.
///
/// The distance horizon d_star is derived from the time horizon and walking
/// speed; with defaults it is exactly 2500 m. Horizons in the 2-3 km band are
/// the calibrated regime; values outside it are legal but flagged (see
/// warnings()).
struct DnaParams {
  double t_star_min = 30.0;
  double walk_speed_kmh = 5.0;
  double garden_time_min = 15.0;
  double a_min_nature_m2 = 1000000.0;
  double c_star = 0.1;
  double epsilon_cv = 0.15;
  double attractiveness_tolerance = 0.25;
  // Band applied to the optional exogenous quality layer.
  double f_c_star = 0.1;
  double f_epsilon_cv = 0.15;

  double d_star_m() const { return t_star_min * walk_speed_kmh * 1000.0 / 60.0; }

  void validate() const {
    if (!(t_star_min > 0.0)) throw ParamError("t_star_min must be positive");
    if (!(walk_speed_kmh > 0.0)) throw ParamError("walk_speed_kmh must be positive");
    if (!(garden_time_min > 0.0)) throw ParamError("garden_time_min must be positive");
    if (garden_time_min > t_star_min) throw ParamError("garden_time_min must not exceed t_star_min");
    if (!(a_min_nature_m2 > 0.0)) throw ParamError("a_min_nature_m2 must be positive");
    if (epsilon_cv < 0.0) throw ParamError("epsilon_cv must be non-negative");
    if (attractiveness_tolerance < 0.0) throw ParamError("attractiveness_tolerance must be non-negative");
    if (f_epsilon_cv < 0.0) throw ParamError("f_epsilon_cv must be non-negative");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    const double d = d_star_m();
    if (d < 2000.0 || d > 3000.0) {
      w.push_back("d_star " + fmt_double(d) + " m is outside the calibrated 2000-3000 m band");
    }
    return w;
  }
};

/// One logical centrality: the cells it occupies, its overall attractiveness,
/// and its amenity mix (shares over a fixed number of categories, summing
/// to 1). Centralities are expected to be similar in attractiveness but
/// distinct in composition.
struct CentralitySpec {
  int id = 0;
  std::vector<Coord> cells;
  double attractiveness = 1.0;
  std::vector<double> composition;

  void validate() const {
    if (cells.empty()) throw ParamError("centrality spec must occupy at least one cell");
    if (!(attractiveness > 0.0)) throw ParamError("centrality attractiveness must be positive");
    double total = 0.0;
    for (double share : composition) {
      if (share < 0.0) throw ParamError("composition shares must be non-negative");
      total += share;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
      throw ParamError("composition shares must sum to 1, got " + fmt_double(total));
    }
  }
};

enum class PrincipleId : std::uint8_t { I, II, III, IV, V, VI, Gardens };

inline const char* principle_name(PrincipleId id) {
  switch (id) {
    case PrincipleId::I: return "i";
    case PrincipleId::II: return "ii";
    case PrincipleId::III: return "iii";
    case PrincipleId::IV: return "iv";
    case PrincipleId::V: return "v";
    case PrincipleId::VI: return "vi";
    case PrincipleId::Gardens: return "gardens";
  }
  return "?";
}

struct Violation {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Outcome of one principle check. passed == violations.empty() unless the
/// check was vacuous (nothing to evaluate).
struct PrincipleResult {
  PrincipleId id = PrincipleId::I;
  bool passed = false;
  bool vacuous = false;
  std::string measured_name;
  double measured = 0.0;
  std::vector<Violation> violations;
};

struct AuditReport {
  std::vector<PrincipleResult> results;  // order: i, ii, iii, iv, v, vi, gardens
  bool overall_pass = false;             // AND over non-vacuous results
  bool overall_vacuous = false;          // every check was vacuous
  std::uint64_t grid_digest = 0;
  DnaParams params;
  std::vector<std::string> notes;

  const PrincipleResult& result(PrincipleId id) const {
    for (const PrincipleResult& r : results) {
      if (r.id == id) return r;
    }
    throw ParamError("no such principle result");
  }
};

/// Stable hash of the lattice (dimensions, cell size, every cell state).
/// Equal grids hash equal; any single-cell change changes the digest.
inline std::uint64_t grid_digest(const Grid& grid) {
  Fnv1a64 h;
  h.update_u64(static_cast<std::uint64_t>(grid.width));
  h.update_u64(static_cast<std::uint64_t>(grid.height));
  h.update_u64(std::bit_cast<std::uint64_t>(grid.cell_size_m));
  for (CellState s : grid.cells) {
    const unsigned char b = static_cast<unsigned char>(s);
    h.update(&b, 1);
  }
  return h.digest();
}

/// Marks cells belonging to Nature regions of at least a_min square meters.
/// Gardens never qualify, nor does undersized nature.
inline std::vector<std::uint8_t> qualifying_nature_mask(const Grid& grid, double a_min_nature_m2) {
  std::vector<std::uint8_t> mask(grid.cell_count(), 0);
  for (const Region& region : connected_regions(grid, CellState::Nature)) {
    if (region.area_m2 >= a_min_nature_m2) {
      for (Coord c : region.member_cells) mask[static_cast<std::size_t>(grid.index(c))] = 1;
    }
  }
  return mask;
}

/// One kernel per Centrality cell, carrying its spec's attractiveness, with
/// linear decay reaching exactly the walkability horizon.
inline std::vector<AmenityKernel> kernels_from_specs(const std::vector<CentralitySpec>& specs,
                                                     const DnaParams& params) {
  std::vector<AmenityKernel> kernels;
  for (const CentralitySpec& spec : specs) {
    for (Coord c : spec.cells) {
      kernels.push_back(AmenityKernel{c, spec.attractiveness, params.d_star_m(),
                                      DecayFamily::LinearCutoff, 2.0});
    }
  }
  return kernels;
}

namespace detail {

/// Shared machinery for the reachability principles: every cell of the
/// population must reach a source within limit_min. Unreachable counts as a
/// violation. Vacuous when the population is empty.
inline PrincipleResult audit_reachability(PrincipleId id, const Grid& grid,
                                          const std::vector<std::uint8_t>& sources,
                                          const std::function<bool(CellState)>& population,
                                          double limit_min, double walk_speed_kmh) {
  PrincipleResult result;
  result.id = id;
  result.measured_name = "worst_minutes";

  const DistanceField field = distance_field_from_mask(grid, sources, walk_speed_kmh);
  bool any = false;
  double worst = 0.0;
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      if (!population(grid.at(row, col))) continue;
      any = true;
      const double t = field.at(row, col);
      worst = std::max(worst, t);
      if (!(t <= limit_min)) result.violations.push_back(Violation{row, col, t});
    }
  }
  if (!any) {
    result.vacuous = true;
    result.passed = true;
    return result;
  }
  result.measured = worst;
  result.passed = result.violations.empty();
  return result;
}

inline std::vector<std::uint8_t> state_mask(const Grid& grid, CellState s) {
  std::vector<std::uint8_t> mask(grid.cell_count(), 0);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) mask[i] = grid.cells[i] == s ? 1 : 0;
  return mask;
}

}  // namespace detail

/// Principle i: equal-compensative urban quality. The benefit field derived
/// from the supplied kernels must sit in the constancy band (min >= c_star,
/// CV <= epsilon_cv) over dweller cells; an optional exogenous quality layer
/// is held to its own band. Vacuous when there are no dweller cells or when
/// neither kernels nor a quality layer were supplied.
inline PrincipleResult audit_principle_i(const Grid& grid, const std::vector<AmenityKernel>& kernels,
                                         const std::vector<double>* f_layer, const DnaParams& params) {
  if (f_layer != nullptr && f_layer->size() != grid.cell_count()) {
    throw ParamError("quality layer size does not match grid");
  }
  PrincipleResult result;
  result.id = PrincipleId::I;
  result.measured_name = "benefit_cv";
  result.measured = std::numeric_limits<double>::quiet_NaN();

  if (kernels.empty() && f_layer == nullptr) {
    result.vacuous = true;
    result.passed = true;
    return result;
  }

  const BenefitField field = benefit_field(grid, kernels, DistanceMode::StraightLine);
  const BenefitStats stats = benefit_stats(field, grid, mask_dwellers);
  const BandCheck band = isobenefit_check(stats, params.c_star, params.epsilon_cv);
  if (band.vacuous) {
    result.vacuous = true;
    result.passed = true;
    return result;
  }
  if (band.cv.has_value()) result.measured = *band.cv;

  bool cv_failed = !band.cv.has_value() || *band.cv > params.epsilon_cv;
  Coord min_cell{0, 0}, max_cell{0, 0};
  double min_seen = std::numeric_limits<double>::infinity();
  double max_seen = -std::numeric_limits<double>::infinity();
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      if (!mask_dwellers(grid.at(row, col))) continue;
      const double v = field.at(row, col);
      if (v < min_seen) { min_seen = v; min_cell = Coord{row, col}; }
      if (v > max_seen) { max_seen = v; max_cell = Coord{row, col}; }
      if (!kernels.empty() && v < params.c_star) {
        result.violations.push_back(Violation{row, col, v});
      }
    }
  }
  if (!kernels.empty() && cv_failed && result.violations.empty()) {
    // Dispersion failed with every cell above the floor; report the extremes.
    result.violations.push_back(Violation{min_cell.row, min_cell.col, min_seen});
    if (max_cell != min_cell) result.violations.push_back(Violation{max_cell.row, max_cell.col, max_seen});
  }

  bool f_ok = true;
  if (f_layer != nullptr) {
    BenefitField f;
    f.width = grid.width;
    f.height = grid.height;
    f.values = *f_layer;
    const BenefitStats f_stats = benefit_stats(f, grid, mask_dwellers);
    const BandCheck f_band = isobenefit_check(f_stats, params.f_c_star, params.f_epsilon_cv);
    f_ok = f_band.passed;
    if (!f_ok) {
      for (int row = 0; row < grid.height && result.violations.size() < grid.cell_count(); ++row) {
        for (int col = 0; col < grid.width; ++col) {
          if (!mask_dwellers(grid.at(row, col))) continue;
          const double v = f.at(row, col);
          if (v < params.f_c_star) result.violations.push_back(Violation{row, col, v});
        }
      }
      if (result.violations.empty()) {
        result.violations.push_back(Violation{min_cell.row, min_cell.col, f.at(min_cell)});
      }
    }
  }

  const bool benefit_ok = kernels.empty() ? true : band.passed;
  result.passed = benefit_ok && f_ok && result.violations.empty();
  return result;
}

/// Principle ii: every Built cell reaches the ordinary daily points (housed
/// in centralities, plus any caller-supplied extra daily sources) within
/// t_star minutes of walking.
inline PrincipleResult audit_principle_ii(const Grid& grid, const DnaParams& params,
                                          const std::vector<Coord>& extra_daily_sources = {}) {
  auto sources = detail::state_mask(grid, CellState::Centrality);
  for (Coord c : extra_daily_sources) {
    if (!grid.in_bounds(c)) throw ParamError("extra daily source outside grid");
    sources[static_cast<std::size_t>(grid.index(c))] = 1;
  }
  return detail::audit_reachability(PrincipleId::II, grid, sources,
                                    [](CellState s) { return s == CellState::Built; },
                                    params.t_star_min, params.walk_speed_kmh);
}

/// Principle iii: every Built cell reaches a centrality within t_star.
/// Same machinery as principle ii but kept as its own report entry.
inline PrincipleResult audit_principle_iii(const Grid& grid, const DnaParams& params) {
  PrincipleResult result = detail::audit_reachability(
      PrincipleId::III, grid, detail::state_mask(grid, CellState::Centrality),
      [](CellState s) { return s == CellState::Built; }, params.t_star_min, params.walk_speed_kmh);
  result.id = PrincipleId::III;
  return result;
}

/// Principle iv: every dweller cell reaches real nature (a Nature region of
/// at least a_min square meters; gardens and undersized patches never count)
/// within t_star.
inline PrincipleResult audit_principle_iv(const Grid& grid, const DnaParams& params) {
  return detail::audit_reachability(PrincipleId::IV, grid,
                                    qualifying_nature_mask(grid, params.a_min_nature_m2),
                                    mask_dwellers, params.t_star_min, params.walk_speed_kmh);
}

/// Principle v: (a) every Nature region is at least a_min square meters;
/// (b) no Built cell stands alone (each has a Built or Centrality 8-neighbor).
inline PrincipleResult audit_principle_v(const Grid& grid, const DnaParams& params) {
  PrincipleResult result;
  result.id = PrincipleId::V;
  result.measured_name = "min_nature_area_m2";
  result.measured = std::numeric_limits<double>::quiet_NaN();

  const auto regions = connected_regions(grid, CellState::Nature);
  bool any_nature = !regions.empty();
  for (const Region& region : regions) {
    if (std::isnan(result.measured) || region.area_m2 < result.measured) {
      result.measured = region.area_m2;
    }
    if (region.area_m2 < params.a_min_nature_m2) {
      const Coord c = region.member_cells.front();
      result.violations.push_back(Violation{c.row, c.col, region.area_m2});
    }
  }

  bool any_built = false;
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      if (grid.at(row, col) != CellState::Built) continue;
      any_built = true;
      bool attached = false;
      for (const auto& off : kNeighborOffsets8) {
        const int nr = row + off[0];
        const int nc = col + off[1];
        if (grid.in_bounds(nr, nc) && is_settlement(grid.at(nr, nc))) {
          attached = true;
          break;
        }
      }
      if (!attached) result.violations.push_back(Violation{row, col, 0.0});
    }
  }

  if (!any_nature && !any_built) {
    result.vacuous = true;
    result.passed = true;
    return result;
  }
  result.passed = result.violations.empty();
  return result;
}

/// Principle vi: centralities differ from each other. (a) no two composition
/// vectors coincide (L1 distance above 1e-6); (b) every attractiveness sits
/// within the tolerance band around the mean. Fewer than two centralities is
/// vacuous.
inline PrincipleResult audit_principle_vi(const std::vector<CentralitySpec>& specs,
                                          const DnaParams& params) {
  PrincipleResult result;
  result.id = PrincipleId::VI;
  result.measured_name = "max_attractiveness_deviation";
  if (specs.size() < 2) {
    result.vacuous = true;
    result.passed = true;
    return result;
  }

  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      const auto& a = specs[i].composition;
      const auto& b = specs[j].composition;
      double l1 = 0.0;
      const std::size_t dim = std::max(a.size(), b.size());
      for (std::size_t k = 0; k < dim; ++k) {
        const double av = k < a.size() ? a[k] : 0.0;
        const double bv = k < b.size() ? b[k] : 0.0;
        l1 += std::fabs(av - bv);
      }
      if (l1 <= 1e-6) {
        const Coord c = specs[j].cells.empty() ? Coord{-1, -1} : specs[j].cells.front();
        result.violations.push_back(Violation{c.row, c.col, l1});
      }
    }
  }

  double mean = 0.0;
  for (const CentralitySpec& s : specs) mean += s.attractiveness;
  mean /= static_cast<double>(specs.size());
  double worst = 0.0;
  for (const CentralitySpec& s : specs) {
    const double deviation = std::fabs(s.attractiveness - mean) / mean;
    worst = std::max(worst, deviation);
    if (deviation > params.attractiveness_tolerance) {
      const Coord c = s.cells.empty() ? Coord{-1, -1} : s.cells.front();
      result.violations.push_back(Violation{c.row, c.col, deviation});
    }
  }
  result.measured = worst;
  result.passed = result.violations.empty();
  return result;
}

/// Garden rule: every Built cell has green contact (a Garden cell or any
/// Nature cell, regardless of region size) within garden_time minutes.
inline PrincipleResult audit_gardens(const Grid& grid, const DnaParams& params) {
  std::vector<std::uint8_t> sources(grid.cell_count(), 0);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (is_green(grid.cells[i])) sources[i] = 1;
  }
  PrincipleResult result = detail::audit_reachability(
      PrincipleId::Gardens, grid, sources, [](CellState s) { return s == CellState::Built; },
      params.garden_time_min, params.walk_speed_kmh);
  result.id = PrincipleId::Gardens;
  return result;
}

/// Optional extra audit inputs beyond the grid and the centrality specs.
struct AuditInputs {
  std::vector<AmenityKernel> extra_kernels;  // audit-supplied amenities/disamenities
  const std::vector<double>* f_layer = nullptr;
  std::vector<Coord> extra_daily_sources;
  bool use_spec_kernels = true;  // derive one kernel per Centrality cell from the specs
};

/// Runs all seven checks and aggregates them. Read-only and deterministic:
/// repeated calls on the same inputs produce identical reports.
inline AuditReport audit_all(const Grid& grid, const std::vector<CentralitySpec>& specs,
                             const DnaParams& params, const AuditInputs& inputs = {}) {
  params.validate();
  for (const CentralitySpec& spec : specs) spec.validate();

  std::vector<AmenityKernel> kernels = inputs.extra_kernels;
  if (inputs.use_spec_kernels) {
    const auto derived = kernels_from_specs(specs, params);
    kernels.insert(kernels.end(), derived.begin(), derived.end());
  }

  AuditReport report;
  report.params = params;
  report.grid_digest = grid_digest(grid);
  report.notes = params.warnings();

  report.results.push_back(audit_principle_i(grid, kernels, inputs.f_layer, params));
  report.results.push_back(audit_principle_ii(grid, params, inputs.extra_daily_sources));
  report.results.push_back(audit_principle_iii(grid, params));
  report.results.push_back(audit_principle_iv(grid, params));
  report.results.push_back(audit_principle_v(grid, params));
  report.results.push_back(audit_principle_vi(specs, params));
  report.results.push_back(audit_gardens(grid, params));

  if (kernels.empty() && inputs.f_layer == nullptr) {
    report.notes.push_back("principle i is vacuous: no amenity kernels or quality layer supplied");
  }
  if (specs.size() < 2) {
    report.notes.push_back("principle vi is vacuous: fewer than two centrality specs supplied");
  }
  if (specs.size() >= 2) {
    double mean = 0.0;
    for (const CentralitySpec& s : specs) mean += s.attractiveness;
    mean /= static_cast<double>(specs.size());
    for (const CentralitySpec& s : specs) {
      if ((s.attractiveness - mean) / mean > 2.0 * params.attractiveness_tolerance) {
        report.notes.push_back("centrality " + std::to_string(s.id) +
                               " dominates: attractiveness exceeds the mean by more than twice the tolerance");
      }
    }
  }

  report.overall_pass = true;
  report.overall_vacuous = true;
  for (const PrincipleResult& r : report.results) {
    if (!r.vacuous) {
      report.overall_vacuous = false;
      report.overall_pass = report.overall_pass && r.passed;
    }
  }
  return report;
}

}  // namespace isobenefit
