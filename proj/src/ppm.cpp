#include "rotor/ppm.hpp"

#include <cctype>

#include "rotor/errors.hpp"

namespace rotor {

Box layer_box(std::int64_t r) { return {1 - r, r, 1 - r, r}; }

std::string render_ppm(const std::function<std::uint32_t(LatticePoint)>& rotor, const Box& box) {
  if (box.width() <= 0 || box.height() <= 0) throw EmptyBoxError("nothing to render in an empty box");
  std::string out = "P6\n" + std::to_string(box.width()) + " " + std::to_string(box.height()) +
                    "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(3 * box.width() * box.height()));
  for (std::int64_t y = box.ymax; y >= box.ymin; --y) {
    for (std::int64_t x = box.xmin; x <= box.xmax; ++x) {
      const Rgb c = kPalette[rotor({x, y}) % 4];
      out.push_back(static_cast<char>(c.r));
      out.push_back(static_cast<char>(c.g));
      out.push_back(static_cast<char>(c.b));
    }
  }
  return out;
}

namespace {

// Header token: digits or the magic, after single whitespace separators.
std::size_t read_number(std::string_view s, std::size_t& pos) {
  const std::size_t start = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos == start || pos - start > 9) throw PpmFormatError("bad number in PPM header");
  return std::stoul(std::string(s.substr(start, pos - start)));
}

void expect_space(std::string_view s, std::size_t& pos) {
  if (pos >= s.size() || !std::isspace(static_cast<unsigned char>(s[pos])))
    throw PpmFormatError("expected whitespace in PPM header");
  ++pos;
}

}  // namespace

RotorRaster parse_ppm(std::string_view bytes) {
  if (bytes.substr(0, 2) != "P6") throw PpmFormatError("not a binary PPM");
  std::size_t pos = 2;
  expect_space(bytes, pos);
  RotorRaster img;
  img.width = read_number(bytes, pos);
  expect_space(bytes, pos);
  img.height = read_number(bytes, pos);
  expect_space(bytes, pos);
  if (read_number(bytes, pos) != 255) throw PpmFormatError("maximum value must be 255");
  expect_space(bytes, pos);
  if (img.width == 0 || img.height == 0) throw PpmFormatError("empty image");
  const std::size_t n = img.width * img.height;
  if (bytes.size() - pos != 3 * n) throw PpmFormatError("pixel data has the wrong length");
  img.residues.reserve(n);
  for (std::size_t i = 0; i < n; ++i, pos += 3) {
    const Rgb c{static_cast<std::uint8_t>(bytes[pos]), static_cast<std::uint8_t>(bytes[pos + 1]),
                static_cast<std::uint8_t>(bytes[pos + 2])};
    std::uint32_t r = 0;
    while (r < 4 && !(kPalette[r] == c)) ++r;
    if (r == 4) throw PpmFormatError("pixel " + std::to_string(i) + " is not a palette colour");
    img.residues.push_back(r);
  }
  return img;
}

}  // namespace rotor
