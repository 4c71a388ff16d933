#include <doctest.h>

#include "rotor/errors.hpp"
#include "rotor/lattice.hpp"
#include "rotor/ppm.hpp"

using namespace rotor;

TEST_CASE("one east pixel") {
  const std::string img = render_ppm([](LatticePoint) { return 0u; }, Box{0, 0, 0, 0});
  CHECK(img == std::string("P6\n1 1\n255\n\xff\xff\xff", 14));
  const auto r = parse_ppm(img);
  CHECK(r.width == 1);
  CHECK(r.residues == std::vector<std::uint32_t>{0});
}

TEST_CASE("sector image of the initial configuration") {
  const Box box = layer_box(20);
  CHECK(box.width() == 40);
  CHECK(box.height() == 40);
  const std::string img = render_ppm(z2_initial_rotor, box);
  const std::string header = "P6\n40 40\n255\n";
  REQUIRE(img.size() == header.size() + 40 * 40 * 3);
  CHECK(img.compare(0, header.size(), header) == 0);
  int counts[4] = {0, 0, 0, 0};
  for (std::int64_t row = 0; row < 40; ++row) {
    for (std::int64_t col = 0; col < 40; ++col) {
      const std::int64_t x = box.xmin + col, y = box.ymax - row;
      // Sector predicate on X = 2x−1, Y = 2y−1; each diagonal goes to the
      // sector anticlockwise of it.
      const std::int64_t X = 2 * x - 1, Y = 2 * y - 1;
      std::uint32_t want;
      if (X > 0 && -X <= Y && Y < X) want = 0;
      else if (Y > 0 && -Y < X && X <= Y) want = 1;
      else if (X < 0 && X < Y && Y <= -X) want = 2;
      else want = 3;
      const auto* px = reinterpret_cast<const unsigned char*>(img.data()) + header.size() +
                       3 * (row * 40 + col);
      const Rgb got{px[0], px[1], px[2]};
      CHECK(got == kPalette[want]);
      ++counts[want];
    }
  }
  // Four congruent sectors.
  CHECK(counts[0] == 400);
  CHECK(counts[1] == 400);
  CHECK(counts[2] == 400);
  CHECK(counts[3] == 400);
}

TEST_CASE("round trip") {
  const Box box{-3, 4, -2, 1};
  auto f = [](LatticePoint p) { return static_cast<std::uint32_t>((p.x * 7 + p.y * 3 + 100) % 4); };
  const auto r = parse_ppm(render_ppm(f, box));
  REQUIRE(r.width == 8);
  REQUIRE(r.height == 4);
  for (std::size_t row = 0; row < r.height; ++row)
    for (std::size_t col = 0; col < r.width; ++col)
      CHECK(r.residues[row * r.width + col] ==
            f({box.xmin + static_cast<std::int64_t>(col), box.ymax - static_cast<std::int64_t>(row)}));
}

TEST_CASE("ppm errors") {
  CHECK_THROWS_AS(render_ppm(z2_initial_rotor, Box{1, 0, 0, 0}), EmptyBoxError);
  CHECK_THROWS_AS(parse_ppm("P3\n1 1\n255\n"), PpmFormatError);
  CHECK_THROWS_AS(parse_ppm("P6\n2 1\n255\n\xff\xff\xff"), PpmFormatError);
  CHECK_THROWS_AS(parse_ppm(std::string("P6\n1 1\n255\n\x01\x02\x03", 14)), PpmFormatError);
  CHECK_THROWS_AS(parse_ppm("P6\n1 1 255\n"), PpmFormatError);
}

TEST_CASE("snapshot after 500 hits") {
  PotentialKernel pk;
  const auto e = run_z2_experiment(pk, {0, 0}, {1, 1}, {0, 0}, 500);
  const Box box = layer_box(static_cast<std::int64_t>(e.max_layer) + 2);
  const auto img = render_ppm([&](LatticePoint p) { return e.rotors.at(p); }, box);
  const auto r = parse_ppm(img);
  CHECK(r.width == static_cast<std::size_t>(box.width()));
  CHECK(r.height == static_cast<std::size_t>(box.height()));
  for (std::size_t row = 0; row < r.height; ++row)
    for (std::size_t col = 0; col < r.width; ++col) {
      const LatticePoint p{box.xmin + static_cast<std::int64_t>(col), box.ymax - static_cast<std::int64_t>(row)};
      CHECK(r.residues[row * r.width + col] == e.rotors.at(p));
    }
}
