#include "support/golden.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace conflict_radar;
using conflict_radar::testing::GoldenCase;

namespace {

std::vector<GoldenCase> cases()
{
    return conflict_radar::testing::load_golden(CONFLICT_RADAR_GOLDEN_DIR);
}

} // namespace

class Golden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(Golden, SingleChangeWithValuesAndSpan)
{
    const std::string failure = conflict_radar::testing::check_golden(GetParam());
    EXPECT_TRUE(failure.empty()) << GetParam().name << ": " << failure;
}

INSTANTIATE_TEST_SUITE_P(Taxonomy, Golden, ::testing::ValuesIn(cases()),
                         [](const ::testing::TestParamInfo<GoldenCase> &info) {
                             return info.param.name;
                         });

TEST(GoldenSet, CoversEveryTaxonomyKindOnce)
{
    std::multiset<ChangeKind> seen;
    for (const GoldenCase &g : cases()) {
        seen.insert(g.kind);
    }
    ASSERT_EQ(seen.size(), kTaxonomyKindCount);
    const auto all = all_change_kinds();
    for (std::size_t i = 0; i < kTaxonomyKindCount; ++i) {
        EXPECT_EQ(seen.count(all[i]), 1u) << to_string(all[i]);
    }
}
