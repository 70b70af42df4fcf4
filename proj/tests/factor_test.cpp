// Copyright 2026 The dbnsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "dbn/error.hpp"
#include "dbn/factor.hpp"
#include "dbn/rng.hpp"

using namespace dbn;

TEST_CASE("product and marginal use first-variable-most-significant layout") {
  const Factor a({0}, {2}, {0.2, 0.8});
  const Factor b({1}, {3}, {0.1, 0.3, 0.6});
  const Factor ab = a.product(b);
  REQUIRE(ab.size() == 6);
  CHECK(ab.vars() == std::vector<int>{0, 1});
  CHECK(ab.values()[1 * 3 + 2] == doctest::Approx(0.8 * 0.6));
  const int keep_b[] = {1};
  const Factor mb = ab.marginal(keep_b);
  for (int j = 0; j < 3; ++j) CHECK(mb.values()[j] == doctest::Approx(b.values()[j]));
  const int swapped[] = {1, 0};
  const Factor ba = ab.marginal(swapped);
  CHECK(ba.vars() == std::vector<int>{1, 0});
  CHECK(ba.values()[2 * 2 + 1] == doctest::Approx(0.8 * 0.6));
  CHECK(ab.sum_out(0).values()[2] == doctest::Approx(0.6));
  CHECK(joint_size(a, b) == 6);
}

TEST_CASE("normalize returns the mass and leaves zero factors alone") {
  Factor f({3}, {2}, {1.0, 3.0});
  CHECK(f.normalize() == doctest::Approx(4.0));
  CHECK(f.values()[1] == doctest::Approx(0.75));
  Factor z({3}, {2}, {0.0, 0.0});
  CHECK(z.normalize() == 0.0);
  CHECK(z.values()[0] == 0.0);
}

TEST_CASE("min-fill order: ties to the lowest vertex, fill counted") {
  // Path 0-1-2-3: the leaves have zero fill; 0 wins the tie.
  std::vector<std::vector<int>> path = {{1}, {0, 2}, {1, 3}, {2}};
  CHECK(min_fill_order(path, {true, true, true, true}).front() == 0);
  // Star centred on 0 with leaves 1..3; centre costs 3 fills.
  std::vector<std::vector<int>> star = {{1, 2, 3}, {0}, {0}, {0}};
  const auto order = min_fill_order(star, {true, true, true, true});
  CHECK(order.front() == 1);
  CHECK(min_fill_order(star, {false, true, false, true}) == std::vector<int>{1, 3});
}

TEST_CASE("variable elimination matches brute-force summation") {
  Rng rng(5);
  auto random_factor = [&](std::vector<int> vars, std::vector<int> cards) {
    std::size_t n = 1;
    for (int c : cards) n *= c;
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform();
    return Factor(std::move(vars), std::move(cards), std::move(v));
  };
  const std::vector<int> card = {2, 3, 2, 2, 3};
  std::vector<Factor> fs = {random_factor({0, 1}, {2, 3}), random_factor({1, 2, 3}, {3, 2, 2}),
                            random_factor({3, 4}, {2, 3}), random_factor({0, 4}, {2, 3})};
  Factor joint;
  for (const auto& f : fs) joint = joint.product(f);
  const int query[] = {4, 2};
  const Factor want = joint.marginal(query);
  const Factor got = eliminate_to(fs, query);
  REQUIRE(got.vars() == std::vector<int>{4, 2});
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(got.values()[i] == doctest::Approx(want.values()[i]).epsilon(1e-12));

  EliminationOptions tiny;
  tiny.max_factor_entries = 4;
  try {
    eliminate_to(fs, query, tiny);
    FAIL("cap not enforced");
  } catch (const CapExceeded& e) {
    CHECK(std::string(e.what()).find("entries") != std::string::npos);
  }
}
