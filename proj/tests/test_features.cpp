#include <cmath>

#include "doctest.h"
#include "rotd/features.hpp"
#include "rotd/rng.hpp"

using namespace rotd;

TEST_CASE("tabular features are standard basis vectors") {
  const FeatureMap map = FeatureMap::tabular(5);
  CHECK(map.dim() == 5);
  CHECK(map.n_states() == 5);
  const Vector phi = map.at(2);
  for (int i = 0; i < 5; ++i) CHECK(phi[i] == (i == 2 ? 1.0 : 0.0));

  const FeatureMap single = FeatureMap::tabular(1);
  CHECK(single.at(0)[0] == 1.0);

  const Matrix gram = map.matrix().transpose() * map.matrix();
  CHECK((gram - Matrix::Identity(5, 5)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("inverted features zero the own-state entry and have unit norm") {
  CHECK_THROWS_AS(FeatureMap::inverted(1), InvalidArgument);
  const FeatureMap map = FeatureMap::inverted(5);
  CHECK(map.dim() == 5);
  const Vector phi0 = map.at(0);
  CHECK(phi0[0] == 0.0);
  for (int i = 1; i < 5; ++i) CHECK(phi0[i] == doctest::Approx(0.5).epsilon(1e-15));
  for (int s = 0; s < 5; ++s) {
    CHECK(map.at(s)[s] == 0.0);
    CHECK(map.at(s).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dependent features follow the normalized ramp") {
  CHECK_THROWS_AS(FeatureMap::dependent(4), InvalidArgument);
  const FeatureMap map = FeatureMap::dependent(5);
  CHECK(map.dim() == 3);
  const double r3 = 1.0 / std::sqrt(3.0);
  CHECK(map.at(0).isApprox(Vector{{1.0, 0.0, 0.0}}, 1e-15));
  CHECK(map.at(2).isApprox(Vector{{r3, r3, r3}}, 1e-15));
  CHECK(map.at(4).isApprox(Vector{{0.0, 0.0, 1.0}}, 1e-15));
  for (int s = 0; s < 5; ++s) CHECK(map.at(s).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rbf grids count features and peak at their centers") {
  const std::array<Interval, 2> bounds{Interval{-1.2, 0.6}, Interval{-0.07, 0.07}};
  const FeatureMap paper = FeatureMap::rbf_grid(bounds, {2, 4, 8, 16, 32}, true);
  CHECK(paper.dim() == 1365);

  const FeatureMap tiny = FeatureMap::rbf_grid(bounds, {2}, false);
  CHECK(tiny.dim() == 4);

  // a state sitting on the first grid's lower-corner center
  Vector corner(2);
  corner << -1.2, -0.07;
  CHECK(tiny.at(corner)[0] == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(FeatureMap::rbf_grid(bounds, {}, true), InvalidArgument);
  const std::array<Interval, 2> degenerate{Interval{0.0, 0.0}, Interval{0.0, 1.0}};
  CHECK_THROWS_AS(FeatureMap::rbf_grid(degenerate, {2}, false), InvalidArgument);
}

TEST_CASE("fourier features enumerate all coefficient vectors") {
  const std::vector<Interval> box8(8, Interval{0.0, 1.0});
  CHECK(FeatureMap::fourier(8, 2, box8).dim() == 6561);

  const std::vector<Interval> box1{Interval{-2.0, 2.0}};
  const FeatureMap constant = FeatureMap::fourier(1, 0, box1);
  CHECK(constant.dim() == 1);
  CHECK(constant.at(Vector::Constant(1, 0.7))[0] == doctest::Approx(1.0));

  const std::vector<Interval> box2(2, Interval{0.0, 1.0});
  const FeatureMap map = FeatureMap::fourier(2, 1, box2);
  CHECK(map.dim() == 4);
  const Vector at_origin = map.at(Vector::Zero(2));
  for (int i = 0; i < 4; ++i) CHECK(at_origin[i] == doctest::Approx(1.0));

  // out-of-bounds states clamp to the box edge instead of erroring
  Vector outside(2);
  outside << 2.5, -1.0;
  Vector edge(2);
  edge << 1.0, 0.0;
  CHECK(map.at(outside).isApprox(map.at(edge), 1e-15));
}

TEST_CASE("action stacking places the base block and keeps norms") {
  Matrix rows(1, 3);
  rows << 1.0, 2.0, 3.0;
  const FeatureMap base = FeatureMap::table(rows);
  const FeatureMap stacked = FeatureMap::stacked(base, 3);
  CHECK(stacked.dim() == 9);

  const Vector phi = stacked.at(0, 1);
  const Vector expected{{0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0}};
  CHECK(phi.isApprox(expected, 1e-15));
  CHECK(phi.norm() == doctest::Approx(base.at(0).norm()).epsilon(1e-15));

  const FeatureMap identity = FeatureMap::stacked(base, 1);
  CHECK(identity.at(0, 0).isApprox(base.at(0), 1e-15));

  CHECK_THROWS_AS(stacked.at(0, 3), InvalidArgument);
  CHECK_THROWS_AS(stacked.at(0, -1), InvalidArgument);

  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) CHECK(stacked.at(0, a).dot(stacked.at(0, b)) == 0.0);
  }
}

TEST_CASE("all maps produce finite vectors of length d") {
  Rng rng(7);
  const std::array<Interval, 2> bounds{Interval{-1.2, 0.6}, Interval{-0.07, 0.07}};
  const FeatureMap rbf = FeatureMap::rbf_grid(bounds, {2, 4}, true);
  const std::vector<Interval> box2{bounds[0], bounds[1]};
  const FeatureMap fourier = FeatureMap::fourier(2, 3, box2);
  for (int trial = 0; trial < 200; ++trial) {
    Vector s(2);
    s << rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07);
    for (const FeatureMap* map : {&rbf, &fourier}) {
      const Vector phi = map->at(s);
      CHECK(phi.size() == map->dim());
      CHECK(phi.allFinite());
    }
  }
  const FeatureMap dependent = FeatureMap::dependent(9);
  CHECK(dependent.dim() == 5);
  for (int s = 0; s < 9; ++s) {
    CHECK(dependent.at(s).size() == 5);
    CHECK(dependent.at(s).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
