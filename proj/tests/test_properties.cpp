// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "properties.hpp"

TEST(AlgebraProperties, AndOr) {
    const auto r = props::and_or_properties(500, 101);
    EXPECT_EQ(r.failures, 0) << r.first;
}

TEST(AlgebraProperties, Quantify) {
    const auto r = props::quantify_properties(500, 202);
    EXPECT_EQ(r.failures, 0) << r.first;
}

TEST(AlgebraProperties, Substitution) {
    const auto r = props::substitution_properties(500, 303);
    EXPECT_EQ(r.failures, 0) << r.first;
}

TEST(AlgebraProperties, Constraints) {
    const auto r = props::constraint_properties(500, 404);
    EXPECT_EQ(r.failures, 0) << r.first;
}
