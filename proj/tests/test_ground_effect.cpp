#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "morpho/errors.hpp"
#include "morpho/ground_effect.hpp"
#include "morpho/scenario.hpp"

using namespace morpho;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const GroundEffectTable& shipped() {
  static const GroundEffectTable t = load_table_file(data_dir() / "ground_effect.csv");
  return t;
}

}  // namespace

TEST_CASE("shipped table") {
  const auto& t = shipped();
  CHECK(t.angles_deg == std::vector<double>{40, 50, 60, 70});
  CHECK(t.heights == std::vector<double>{0.25, 0.32, 0.42, 0.52, 0.62, 0.72});
  CHECK(t.ratio.rows() == 4);
  CHECK(t.ratio.cols() == 6);
  CHECK(t.ratio.minCoeff() > 0.0);
  CHECK(t.sigma.minCoeff() >= 0.0);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(t.ratio(i, 5) - 1.0) <= 0.02);

  // closer is stronger up to 60 deg
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j + 1 < 6; ++j) CHECK(t.ratio(i, j) >= t.ratio(i, j + 1));
  }
  CHECK(t.ratio(3, 0) < 1.0);
}

TEST_CASE("thrust ratio lookups") {
  const auto& t = shipped();
  CHECK(thrust_ratio(2.0, 0.7, t) == 1.0);
  CHECK(thrust_ratio(0.73, 50 * kDeg, t) == 1.0);
  CHECK(thrust_ratio(0.25, 50 * kDeg, t) == doctest::Approx(1.2).epsilon(0.02));
  CHECK(thrust_ratio(0.25, 70 * kDeg, t) < 1.0);
  CHECK(thrust_ratio(0.25, 70 * kDeg, t) - ratio_sigma(0.25, 70 * kDeg, t) ==
        doctest::Approx(0.85).epsilon(0.01));

  // clamps
  CHECK(thrust_ratio(0.05, 50 * kDeg, t) == thrust_ratio(0.25, 50 * kDeg, t));
  CHECK(thrust_ratio(0.3, 85 * kDeg, t) == thrust_ratio(0.3, 70 * kDeg, t));
  // blend toward 1 below the smallest angle
  CHECK(thrust_ratio(0.25, 0.0, t) == 1.0);
  CHECK(thrust_ratio(0.25, 20 * kDeg, t) ==
        doctest::Approx(1.0 + 0.5 * (thrust_ratio(0.25, 40 * kDeg, t) - 1.0)));

  // bilinear inside a cell
  const double mid = thrust_ratio(0.285, 45 * kDeg, t);
  CHECK(mid == doctest::Approx(0.25 * (1.14 + 1.1 + 1.19 + 1.14)));
}

TEST_CASE("thrust ratio is continuous") {
  const auto& t = shipped();
  double worst = 0.0;
  for (double z = 0.0; z <= 1.0; z += 0.0013) {
    for (double deg = 0.0; deg <= 90.0; deg += 0.37) {
      const double r = thrust_ratio(z, deg * kDeg, t);
      worst = std::max({worst, std::abs(thrust_ratio(z + 1e-6, deg * kDeg, t) - r),
                        std::abs(thrust_ratio(z, deg * kDeg + 1e-6, t) - r)});
    }
  }
  CHECK(worst < 1e-4);
  // across the far-field boundary
  CHECK(std::abs(thrust_ratio(0.72, 60 * kDeg, t) - thrust_ratio(0.7200001, 60 * kDeg, t)) <
        1e-12);
}

TEST_CASE("table parsing errors") {
  const std::string header = "phi_deg,z_m,ratio,sigma\n";
  CHECK_NOTHROW(load_table_string(header + "40,0.2,1.1,0\n40,0.5,1,0\n"));
  CHECK_THROWS_AS(load_table_string(header + "40,0.2,0,0\n"), NonPositiveRatio);
  CHECK_THROWS_AS(load_table_string(header + "40,0.2,-1,0\n"), NonPositiveRatio);
  CHECK_THROWS_AS(load_table_string(header + "40,0.2,1,0\n40,0.5,1,0\n50,0.2,1,0\n"),
                  NonRectangularGrid);
  CHECK_THROWS_AS(load_table_string(header + "40,0.2,abc,0\n"), ParseError);
  CHECK_THROWS_AS(load_table_string(header + "40,0.2,1\n"), ParseError);
  CHECK_THROWS_AS(load_table_string("phi,z\n40,0.2,1,0\n"), ParseError);
  CHECK_THROWS_AS(load_table_string(header + "40,0.2,1,-0.1\n"), ParseError);
  CHECK_THROWS_AS(load_table_string(""), ParseError);
  CHECK_THROWS_AS(load_table_file("/nonexistent/table.csv"), ParseError);

  // unsorted rows are sorted and comments skipped
  const auto t = load_table_string("# note\n" + header +
                                   "50,0.5,1,0\n40,0.5,1,0\n50,0.2,1.2,0\n40,0.2,1.1,0\n");
  CHECK(t.angles_deg == std::vector<double>{40, 50});
  CHECK(t.heights == std::vector<double>{0.2, 0.5});
  CHECK(t.ratio(1, 0) == 1.2);
}

TEST_CASE("stochastic samples") {
  const auto& t = shipped();

  SUBCASE("zero sigma reproduces the mean") {
    GroundEffectTable q = t;
    q.sigma.setZero();
    std::mt19937_64 rng(1);
    for (double z : {0.25, 0.4, 0.9}) {
      CHECK(sample_ratio(z, 70 * kDeg, q, rng) == thrust_ratio(z, 70 * kDeg, q));
    }
  }

  SUBCASE("sample mean within three standard errors") {
    std::mt19937_64 rng(2);
    const int n = 100000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += sample_ratio(0.25, 70 * kDeg, t, rng);
    const double mean = sum / n;
    const double se = ratio_sigma(0.25, 70 * kDeg, t) / std::sqrt(n);
    CHECK(std::abs(mean - thrust_ratio(0.25, 70 * kDeg, t)) < 3 * se);
  }

  SUBCASE("deterministic per seed") {
    std::mt19937_64 a(42), b(42);
    for (int k = 0; k < 10; ++k) {
      CHECK(sample_ratio(0.3, 60 * kDeg, t, a) == sample_ratio(0.3, 60 * kDeg, t, b));
    }
  }

  SUBCASE("no variability in the far field") {
    CHECK(ratio_sigma(1.5, 70 * kDeg, t) == 0.0);
    CHECK(ratio_sigma(0.3, 0.0, t) == 0.0);
  }
}
