#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "isobenefit/Errors.hpp"
#include "isobenefit/Grid.hpp"
#include "isobenefit/Numeric.hpp"

namespace isobenefit {

// Land-use raster text format:
//
//   ISOBENEFIT v1 <width> <height> <cell_size_m>
//   <height rows of width single-character codes>
//
// Codes: '.' Empty, 'B' Built, 'C' Centrality, 'N' Nature, 'g' Garden.
// The serializer writes the cell size in shortest round-trip decimal form;
// parse(serialize(grid)) == grid holds bit-exactly.

inline char cell_code(CellState s) {
  switch (s) {
    case CellState::Empty: return '.';
    case CellState::Built: return 'B';
    case CellState::Centrality: return 'C';
    case CellState::Nature: return 'N';
    case CellState::Garden: return 'g';
  }
  return '?';
}

inline std::string serialize_raster(const Grid& grid) {
  std::string out = "ISOBENEFIT v1 " + std::to_string(grid.width) + " " + std::to_string(grid.height) +
                    " " + fmt_double(grid.cell_size_m) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(grid.height) * (static_cast<std::size_t>(grid.width) + 1));
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) out.push_back(cell_code(grid.at(row, col)));
    out.push_back('\n');
  }
  return out;
}

namespace detail {

struct LineSplitter {
  std::string_view text;
  std::size_t pos = 0;
  int line_no = 0;

  bool next(std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      line = text.substr(pos);
      pos = text.size();
    } else {
      line = text.substr(pos, nl - pos);
      pos = nl + 1;
    }
    ++line_no;
    return true;
  }
};

}  // namespace detail

inline Grid parse_raster(std::string_view text) {
  detail::LineSplitter lines{text};
  std::string_view header;
  if (!lines.next(header)) throw ParseError("empty raster document", 1, 1);

  // Header: magic, version, width, height, cell size.
  std::vector<std::string_view> tokens;
  {
    std::size_t i = 0;
    while (i < header.size()) {
      while (i < header.size() && header[i] == ' ') ++i;
      std::size_t j = i;
      while (j < header.size() && header[j] != ' ') ++j;
      if (j > i) tokens.push_back(header.substr(i, j - i));
      i = j;
    }
  }
  if (tokens.size() != 5 || tokens[0] != "ISOBENEFIT" || tokens[1] != "v1") {
    throw ParseError("bad header, expected 'ISOBENEFIT v1 <width> <height> <cell_size_m>'", 1, 1);
  }
  const auto parse_int_token = [&](std::string_view tok, const char* what) {
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || v <= 0) {
      throw ParseError(std::string("bad ") + what + " '" + std::string(tok) + "'", 1, 1);
    }
    return v;
  };
  const int width = parse_int_token(tokens[2], "width");
  const int height = parse_int_token(tokens[3], "height");
  double cell_size = 0.0;
  {
    const auto tok = tokens[4];
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), cell_size);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !(cell_size > 0.0)) {
      throw ParseError("bad cell size '" + std::string(tok) + "'", 1, 1);
    }
  }

  Grid grid = new_grid(width, height, cell_size, CellState::Empty);
  for (int row = 0; row < height; ++row) {
    std::string_view body;
    if (!lines.next(body)) {
      throw ParseError("missing row " + std::to_string(row + 1) + " of " + std::to_string(height),
                       lines.line_no + 1, 1);
    }
    if (static_cast<int>(body.size()) != width) {
      throw ParseError("row has " + std::to_string(body.size()) + " cells, expected " +
                           std::to_string(width),
                       lines.line_no, static_cast<int>(std::min<std::size_t>(body.size(), static_cast<std::size_t>(width))) + 1);
    }
    for (int col = 0; col < width; ++col) {
      CellState s;
      switch (body[static_cast<std::size_t>(col)]) {
        case '.': s = CellState::Empty; break;
        case 'B': s = CellState::Built; break;
        case 'C': s = CellState::Centrality; break;
        case 'N': s = CellState::Nature; break;
        case 'g': s = CellState::Garden; break;
        default:
          throw ParseError(std::string("unknown cell code '") + body[static_cast<std::size_t>(col)] + "'",
                           lines.line_no, col + 1);
      }
      grid.set(row, col, s);
    }
  }
  std::string_view trailing;
  while (lines.next(trailing)) {
    if (!trailing.empty()) {
      throw ParseError("unexpected content after raster body", lines.line_no, 1);
    }
  }
  return grid;
}

}  // namespace isobenefit
