#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rotor/lattice.hpp"

namespace rotor {

/// Inclusive lattice box.
struct Box {
  std::int64_t xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  std::int64_t width() const { return xmax - xmin + 1; }
  std::int64_t height() const { return ymax - ymin + 1; }
};

/// (−r, r]², the box of layers 1..r.
Box layer_box(std::int64_t r);

/// East, North, West, South.
struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};
inline constexpr Rgb kPalette[4] = {{255, 255, 255}, {255, 0, 0}, {0, 255, 0}, {0, 0, 255}};

/// Binary P6 image, one pixel per site, top row = largest y. Throws
/// EmptyBoxError for an empty box.
std::string render_ppm(const std::function<std::uint32_t(LatticePoint)>& rotor, const Box& box);

struct RotorRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> residues;  // row-major from the top
};

/// Inverse of render_ppm up to the box origin. Throws PpmFormatError.
RotorRaster parse_ppm(std::string_view bytes);

}  // namespace rotor
