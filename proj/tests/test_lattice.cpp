#include "doctest.h"
#include "lselab/lattice.hpp"

using namespace lselab;

TEST_CASE("linf distance between regions") {
  CHECK(dist(Region::single(Site{0, 0}), Region::single(Site{3, -4})) == 4);
  Region lam = Region::interval(-2, 5);
  CHECK(dist(lam, lam) == 0);
  CHECK(dist(Region::interval(0, 4), Region::interval(6, 10)) == 2);
  CHECK_THROWS_WITH(dist(Region::empty(1), lam), "empty region");
}

TEST_CASE("region set algebra stays sorted and unique") {
  Region r(1, {{3}, {1}, {3}, {2}});
  CHECK(r.size() == 3);
  CHECK(r.site(0) == Site{1});
  CHECK(r.index_of(Site{2}) == 1);
  CHECK(r.index_of(Site{9}) == -1);
  CHECK(diam(r) == 2);
  CHECK(r.halo(1) == Region(1, {{0}, {4}}));
  CHECK(r.grown(1) == Region::interval(0, 4));
}

TEST_CASE("cube partition in one dimension, L = R = 1") {
  CubePartition part(1, 1, 1);
  CHECK(part.cube_extent() == 4);  // base cube {0..4}
  CHECK(part.period() == 6);
  CHECK(part.shift(0) == Site{0});
  CHECK(part.shift(1) == Site{3});

  auto g0 = part.cubes_in_window(0, {-13}, {13});
  REQUIRE(g0.size() == 5);  // anchors -12, -6, 0, 6, 12
  CHECK(g0[2] == Region::interval(0, 4));
  CHECK(g0[3] == Region::interval(6, 10));
  CHECK(dist(g0[2], g0[3]) == 2);  // exactly 2R for this construction

  auto g1 = part.cubes_in_window(1, {0}, {5});
  REQUIRE(!g1.empty());
  CHECK(g1.front() == Region::interval(-3, 1));

  // The collection containing the base cube is s = 0.
  bool found = false;
  for (const auto& c : g0) found = found || (c == Region::interval(0, 4));
  CHECK(found);
}

TEST_CASE("every window site is covered by some collection") {
  for (int d : {1, 2}) {
    CubePartition part(d, 2, 1);
    Site lo(static_cast<size_t>(d), -9), hi(static_cast<size_t>(d), 9);
    Region window = Region::box(lo, hi);
    std::vector<bool> covered(static_cast<size_t>(window.size()), false);
    for (int s = 0; s < part.collections(); ++s)
      for (const auto& cube : part.cubes_in_window(s, lo, hi))
        for (const auto& site : cube.sites()) {
          int idx = window.index_of(site);
          if (idx >= 0) covered[static_cast<size_t>(idx)] = true;
        }
    for (bool c : covered) CHECK(c);
  }
}

TEST_CASE("within one collection cubes stay 2R apart") {
  CubePartition part(2, 2, 1);
  auto cubes = part.cubes_in_window(3, {-15, -15}, {15, 15});
  for (size_t i = 0; i < cubes.size(); ++i)
    for (size_t j = i + 1; j < cubes.size(); ++j) {
      CHECK(cubes[i].intersect(cubes[j]).is_empty());
      CHECK(dist(cubes[i], cubes[j]) >= 2 * part.R());
    }
}

TEST_CASE("overlaps across collections span L on the short edge") {
  for (int L : {1, 4}) {
    CubePartition part(1, L, 1);
    auto a = part.cubes_in_window(0, {0}, {0}).front();
    auto b = part.cubes_in_window(1, {part.cube_extent()}, {part.cube_extent()}).front();
    Region overlap = a.intersect(b);
    REQUIRE(!overlap.is_empty());
    CHECK(diam(overlap) == L);
  }
}

TEST_CASE("cube_containing agrees with window enumeration") {
  CubePartition part(1, 3, 2);
  for (int s = 0; s < 2; ++s) {
    for (int x = -25; x <= 25; ++x) {
      auto hit = part.cube_containing(s, {x});
      bool in_any = false;
      for (const auto& cube : part.cubes_in_window(s, {x}, {x}))
        in_any = in_any || cube.contains({x});
      CHECK(hit.has_value() == in_any);
      if (hit) CHECK(hit->contains({x}));
    }
  }
}
