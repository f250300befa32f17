#pragma once

#include <array>
#include <string>

#include "isobenefit/Errors.hpp"
#include "isobenefit/Grid.hpp"

namespace isobenefit {

// Binary PPM (P6) writer: self-describing, dependency-free, byte-deterministic.
// One scale x scale pixel block per cell.

inline std::array<unsigned char, 3> cell_color(CellState s) {
  switch (s) {
    case CellState::Centrality: return {255, 255, 255};
    case CellState::Nature: return {0, 160, 0};
    case CellState::Built: return {0, 0, 0};
    case CellState::Garden: return {120, 220, 120};
    case CellState::Empty: break;
  }
  return {220, 220, 220};
}

inline std::string render_ppm(const Grid& grid, int scale = 4) {
  if (scale < 1) throw ParamError("render scale must be at least 1");
  const int pw = grid.width * scale;
  const int ph = grid.height * scale;
  std::string out = "P6\n" + std::to_string(pw) + " " + std::to_string(ph) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph) * 3);
  for (int row = 0; row < grid.height; ++row) {
    for (int sy = 0; sy < scale; ++sy) {
      for (int col = 0; col < grid.width; ++col) {
        const auto rgb = cell_color(grid.at(row, col));
        for (int sx = 0; sx < scale; ++sx) {
          out.push_back(static_cast<char>(rgb[0]));
          out.push_back(static_cast<char>(rgb[1]));
          out.push_back(static_cast<char>(rgb[2]));
        }
      }
    }
  }
  return out;
}

}  // namespace isobenefit
