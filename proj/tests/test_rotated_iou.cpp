// Copyright 2026 the partgrid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "partgrid/rotated_iou.hpp"
#include "test_support.hpp"

using namespace partgrid;
using test::random_box;

TEST_CASE("bev_iou of identical and disjoint boxes") {
  const BoxParams b({1, 2, 0}, 1.5, 1.6, 3.9, 0.4);
  CHECK_THAT(bev_iou(b, b), Catch::Matchers::WithinAbs(1.0, 1e-9));

  const BoxParams far({100, 2, 0}, 1.5, 1.6, 3.9, -0.8);
  CHECK(bev_iou(b, far) == 0.0);
}

TEST_CASE("bev_iou of two unit squares offset by a half is one third") {
  const BoxParams a({0, 0, 0}, 1, 1, 1, 0.0);
  const BoxParams b({0.5, 0, 0}, 1, 1, 1, 0.0);
  // Analytic: intersection 0.5, union 1.5.
  CHECK_THAT(bev_iou(a, b), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-9));

  Rng rng(41);
  CHECK_THAT(test::mc_bev_iou(a, b, 400000, rng), Catch::Matchers::WithinAbs(1.0 / 3.0, 0.01));
}

TEST_CASE("bev_iou matches the Monte-Carlo oracle on rotated pairs") {
  Rng rng(17);
  for (int i = 0; i < 40; ++i) {
    BoxParams a = random_box(rng, 3.0);
    BoxParams b = random_box(rng, 3.0);
    b.center.z = a.center.z;  // keep BEV-focused
    const double mc = test::mc_bev_iou(a, b, 300000, rng);
    CHECK_THAT(bev_iou(a, b), Catch::Matchers::WithinAbs(mc, 0.01));
  }
}

TEST_CASE("iou3d basics") {
  const BoxParams b({0, 0, 0}, 2, 1, 4, 1.0);
  CHECK_THAT(iou3d(b, b), Catch::Matchers::WithinAbs(1.0, 1e-9));

  const BoxParams stacked({0, 0, 2.0}, 2, 1, 4, 1.0);  // touching faces, no overlap
  CHECK(iou3d(b, stacked) == 0.0);
}

TEST_CASE("iou3d matches the Monte-Carlo volume oracle") {
  Rng rng(23);
  for (int i = 0; i < 40; ++i) {
    BoxParams a = random_box(rng, 2.0);
    BoxParams b = random_box(rng, 2.0);
    b.center.z = a.center.z + rng.uniform(-0.5, 0.5);
    const double mc = test::mc_iou3d(a, b, 400000, rng);
    CHECK_THAT(iou3d(a, b), Catch::Matchers::WithinAbs(mc, 0.01));
  }
}

TEST_CASE("IoU is symmetric and self-IoU is exactly one") {
  Rng rng(5150);
  for (int i = 0; i < 200; ++i) {
    const BoxParams a = random_box(rng, 4.0);
    const BoxParams b = random_box(rng, 4.0);
    CHECK_THAT(bev_iou(a, b), Catch::Matchers::WithinAbs(bev_iou(b, a), 1e-9));
    CHECK_THAT(iou3d(a, b), Catch::Matchers::WithinAbs(iou3d(b, a), 1e-9));
    CHECK_THAT(bev_iou(a, a), Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(iou3d(a, a), Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("IoU is invariant under a joint rigid transform") {
  Rng rng(777);
  for (int i = 0; i < 100; ++i) {
    const BoxParams a = random_box(rng, 4.0);
    const BoxParams b = random_box(rng, 4.0);
    const double before_bev = bev_iou(a, b);
    const double before_3d = iou3d(a, b);

    const double ang = rng.uniform(-kPi, kPi);
    const Vec3 shift = test::random_point(rng, 30.0);
    auto moved = [&](const BoxParams& box) {
      const double c = std::cos(ang), s = std::sin(ang);
      const Vec3 rc{box.center.x * c - box.center.y * s, box.center.x * s + box.center.y * c,
                    box.center.z};
      return BoxParams(rc + shift, box.h, box.w, box.l, box.theta + ang);
    };
    CHECK_THAT(bev_iou(moved(a), moved(b)), Catch::Matchers::WithinAbs(before_bev, 1e-6));
    CHECK_THAT(iou3d(moved(a), moved(b)), Catch::Matchers::WithinAbs(before_3d, 1e-6));
  }
}
