/*
 * Copyright (C) 2026 The redkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "redkit/equivalence.hpp"
#include "redkit/reducer.hpp"
#include "support/fixtures.hpp"

using namespace redkit;
using namespace redkit::testing;

TEST(Equivalence, ExamplePairOnSamplesAndGrid) {
    AffineChain a = example_chain();
    AffineChain b = reduce_network(a, example_box()).chain;
    EquivReport s = sample_equivalence(a, b, example_box(), 10000, 0);
    EXPECT_LE(s.max_abs_diff, 1e-9);
    EXPECT_EQ(s.argmax_mismatches, 0u);
    EXPECT_EQ(s.samples, 10000u + 4u);  // corners appended
    EquivReport g = grid_equivalence(evaluator(a), evaluator(b), example_box(), 21);
    EXPECT_EQ(g.samples, 441u);
    EXPECT_LE(g.max_abs_diff, 1e-9);
}

TEST(Equivalence, ReflexiveIsExactlyZero) {
    AffineChain a = random_chain({3, 16, 16, 4}, 2);
    EquivReport r = sample_equivalence(a, a, Box::uniform(3, -5, 5), 500, 1);
    EXPECT_EQ(r.max_abs_diff, 0.0);
    EXPECT_EQ(r.argmax_mismatches, 0u);
}

TEST(Equivalence, ConstantOffsetIsReported) {
    AffineChain a = example_chain();
    AffineChain b = a;
    b.affine[1].bias[1] += 1.0;
    EquivReport r = sample_equivalence(a, b, example_box(), 1000, 4);
    EXPECT_DOUBLE_EQ(r.max_abs_diff, 1.0);
    EXPECT_EQ(r.worst_input.size(), 2);
}

TEST(Equivalence, DeterministicGivenSeed) {
    AffineChain a = random_chain({4, 8, 3}, 1), b = random_chain({4, 8, 3}, 2);
    Box box = Box::uniform(4, -1, 1);
    EquivReport r1 = sample_equivalence(a, b, box, 300, 17), r2 = sample_equivalence(a, b, box, 300, 17);
    EXPECT_EQ(r1.max_abs_diff, r2.max_abs_diff);
    EXPECT_EQ(r1.argmax_mismatches, r2.argmax_mismatches);
    EXPECT_EQ(r1.worst_input, r2.worst_input);
    EXPECT_EQ(sample_box(box, 10, 3), sample_box(box, 10, 3));
}

TEST(Equivalence, DifferenceOutsideBoxIsInvisible) {
    // ReLU(x) and x agree on [0, 1] but not below 0.
    AffineChain relu{{AffineMap::identity(1), AffineMap::identity(1)}};
    AffineChain lin{{AffineMap::identity(1)}};
    EXPECT_EQ(grid_equivalence(evaluator(relu), evaluator(lin), Box::uniform(1, 0, 1), 11).max_abs_diff, 0.0);
    EXPECT_DOUBLE_EQ(grid_equivalence(evaluator(relu), evaluator(lin), Box::uniform(1, -1, 1), 2).max_abs_diff, 1.0);
}

TEST(Equivalence, GridGuards) {
    AffineChain a = random_chain({5, 4, 2}, 0);
    EXPECT_THROW(grid_equivalence(evaluator(a), evaluator(a), Box::uniform(5, 0, 1), 3), Error);
    AffineChain one{{AffineMap::identity(1)}};
    EquivReport r = grid_equivalence(evaluator(one), evaluator(one), Box::uniform(1, 0, 1), 2);
    EXPECT_EQ(r.samples, 2u);
    EXPECT_EQ(r.max_abs_diff, 0.0);
}

TEST(Equivalence, WidthMismatchIsContractError) {
    AffineChain a = random_chain({3, 4, 2}, 0), b = random_chain({3, 4, 3}, 0);
    try {
        sample_equivalence(a, b, Box::uniform(3, 0, 1), 10, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::contract);
    }
}

TEST(Equivalence, CornersCoverSmallBoxes) {
    Box box = Box::uniform(3, -1, 2);
    auto c = box_corners(box, 0);
    EXPECT_EQ(c.size(), 8u);
    for (const auto& p : c) EXPECT_TRUE(box.contains(p));
}
