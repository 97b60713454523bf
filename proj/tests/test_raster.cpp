#include <doctest.h>

#include <random>

#include "crownkit/error.hpp"
#include "crownkit/raster.hpp"
#include "oracles.hpp"

using namespace crownkit;

TEST_CASE("percentile interpolates between ranks") {
  const std::vector<double> v{4, 1, 3, 2};
  CHECK(percentile(v, 0) == 1.0);
  CHECK(percentile(v, 50) == doctest::Approx(2.5));
  CHECK(percentile(v, 100) == 4.0);
  const std::vector<double> one{7.25};
  CHECK(percentile(one, 99) == 7.25);
  CHECK_THROWS_AS(percentile(std::vector<double>{}, 50), Error);
  CHECK_THROWS_AS(percentile(v, 100.5), Error);
}

TEST_CASE("percentile agrees with sort-and-interpolate") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-50, 50), pct(0, 100);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 300);
    for (auto& x : v) x = val(rng);
    const double p = trial % 10 == 0 ? 100.0 : pct(rng);
    CHECK(percentile(v, p) == doctest::Approx(oracle::percentile(v, p)).epsilon(1e-12));
  }
}

TEST_CASE("masked values skip nodata and NaN") {
  const GridRef g{3, 2, 1.0, 0, 0};
  Raster r(g, {1, -9999, 3, 4, std::numeric_limits<float>::quiet_NaN(), 6});
  PixelMask m({0, 0}, 2, 3, 1.0);
  for (int rr = 0; rr < 2; ++rr)
    for (int c = 0; c < 3; ++c) m.set(rr, c, true);
  CHECK(masked_values(r, m) == std::vector<double>{1, 3, 4, 6});

  PixelMask hole({0, 1}, 1, 1, 1.0);
  hole.set(0, 0, true);
  CHECK_THROWS_WITH_AS(masked_values(r, hole), doctest::Contains("nodata"), Error);
  CHECK_THROWS_AS(masked_values(r, hole.translated(10, 10)), Error);
}

TEST_CASE("tile extraction pads outside the raster") {
  const GridRef g{5, 5, 1.0, 0, 0};
  std::vector<float> vals(25);
  for (int i = 0; i < 25; ++i) vals[i] = static_cast<float>(i + 1);
  const Raster r(g, vals);

  const Tile inner = extract_tile(r, {2, 2}, 3);
  CHECK_FALSE(inner.pad_flag);
  CHECK(inner.at(0, 0, 0) == 7.0F);
  CHECK(inner.at(0, 2, 2) == 19.0F);

  const Tile corner = extract_tile(r, {0, 0}, 4);
  CHECK(corner.pad_flag);
  CHECK(corner.at(0, 0, 0) == 0.0F);
  CHECK(corner.at(0, 2, 2) == 1.0F);
  CHECK(corner.at(0, 3, 3) == 7.0F);

  CHECK_THROWS_AS(extract_tile(r, {5, 0}, 4), Error);
  CHECK(round_to_pixel({2.5, 3.49}) == Pixel{3, 3});
}

TEST_CASE("multi-band tiles are channel-major") {
  const GridRef g{2, 2, 1.0, 0, 0};
  const std::vector<Raster> bands{Raster(g, {1, 2, 3, 4}), Raster(g, {5, 6, 7, 8})};
  const Tile t = extract_tile(bands, {1, 1}, 2);
  CHECK(t.channels == 2);
  CHECK(t.at(0, 0, 0) == 1.0F);
  CHECK(t.at(1, 1, 1) == 8.0F);
  const std::vector<Raster> mismatched{Raster(g), Raster(GridRef{3, 2, 1.0, 0, 0})};
  CHECK_THROWS_AS(extract_tile(mismatched, {0, 0}, 2), Error);
}
