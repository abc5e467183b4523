#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aerosar/box.hpp"
#include "aerosar/errors.hpp"
#include "aerosar/rng.hpp"
#include "test_util.hpp"

using namespace aerosar;

TEST_CASE("iou of identical boxes is 1") {
  const BoundingBox b{3.0, 4.0, 13.0, 24.0};
  CHECK(iou(b, b) == doctest::Approx(1.0));
}

TEST_CASE("iou half-overlap hand case") {
  // overlap 50, union 150
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou of disjoint boxes is 0") {
  CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {10, 0, 20, 10}) == 0.0);  // touching edges
}

TEST_CASE("iou of degenerate boxes is 0") {
  const BoundingBox point{5, 5, 5, 5};
  CHECK(iou(point, point) == 0.0);
}

TEST_CASE("iou is symmetric, bounded and translation-invariant") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const BoundingBox a = testutil::random_box(rng);
    const BoundingBox b = testutil::random_box(rng);
    const double v = iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(b, a) == doctest::Approx(v).epsilon(1e-12));
    const double dx = rng.uniform(-50, 50), dy = rng.uniform(-50, 50);
    CHECK(iou(a.translated(dx, dy), b.translated(dx, dy)) == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("iou agrees with a Monte-Carlo estimate") {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const BoundingBox a = testutil::random_box(rng, 50.0, 30.0);
    const BoundingBox b = testutil::random_box(rng, 50.0, 30.0);
    const double estimate = testutil::iou_monte_carlo(a, b, rng);
    CHECK(std::abs(iou(a, b) - estimate) < 0.02);
  }
}

TEST_CASE("downsample_bbox") {
  const BoundingBox b{0, 0, 100, 50};
  SUBCASE("factor 1 is the identity") {
    const BoundingBox d = downsample_bbox(b, 1.0);
    CHECK(d.x_max == 100.0);
    CHECK(d.y_max == 50.0);
  }
  SUBCASE("factor 2 halves everything") {
    const BoundingBox d = downsample_bbox(b, 2.0);
    CHECK(d.x_min == 0.0);
    CHECK(d.y_min == 0.0);
    CHECK(d.x_max == 50.0);
    CHECK(d.y_max == 25.0);
  }
  SUBCASE("down then up is the identity") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      const BoundingBox x = testutil::random_box(rng);
      const BoundingBox d = downsample_bbox(x, 2.0);
      CHECK(d.x_min * 2.0 == doctest::Approx(x.x_min).epsilon(1e-9));
      CHECK(d.y_max * 2.0 == doctest::Approx(x.y_max).epsilon(1e-9));
    }
  }
}

TEST_CASE("spectrum round-trips through strings") {
  CHECK(spectrum_from_string(to_string(Spectrum::optical)) == Spectrum::optical);
  CHECK(spectrum_from_string(to_string(Spectrum::thermal)) == Spectrum::thermal);
  CHECK_THROWS_AS(spectrum_from_string("xray"), SchemaError);
}
