#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "lpbm/lpbm.hpp"

namespace {

lpbm::Campaign small(int dim, std::vector<double> p_list) {
    lpbm::Campaign c;
    c.dim = dim;
    c.facets = 2 * dim + 4;
    c.instances = 12;
    c.p_list = std::move(p_list);
    c.seed = 5;
    return c;
}

std::string csv_of(const lpbm::CampaignResult& r) {
    std::ostringstream out;
    lpbm::write_campaign_csv(out, r.rows);
    return out.str();
}

}  // namespace

TEST(Campaign, PlanarLogCaseAlwaysPasses) {
    auto c = small(2, {0.0});
    c.pair_mode = lpbm::PairMode::Merge;
    c.magnitude = 0.05;
    const auto r = lpbm::run_campaign(c);
    EXPECT_EQ(r.error_count, 0);
    EXPECT_EQ(r.summary["per_p"][0]["pass_rate"].get<double>(), 1.0);
}

TEST(Campaign, MinkowskiCaseInSpacePasses) {
    const auto r = lpbm::run_campaign(small(3, {1.0}));
    EXPECT_EQ(r.error_count, 0);
    EXPECT_EQ(r.summary["per_p"][0]["pass_rate"].get<double>(), 1.0);
}

TEST(Campaign, DeterministicOutput) {
    auto c = small(3, {0.0, 0.5});
    c.scan_grid = 9;
    const auto a = lpbm::run_campaign(c);
    const auto b = lpbm::run_campaign(c);
    EXPECT_EQ(csv_of(a), csv_of(b));
    EXPECT_EQ(a.summary.dump(), b.summary.dump());
    EXPECT_EQ(a.summary["nonfinite_count"].get<int>(), 0);
    EXPECT_EQ(a.rows.size(), 24u);
}

TEST(Campaign, ConfigValidation) {
    EXPECT_THROW(lpbm::campaign_from_json(lpbm::Json::parse(R"({"dim": 2})")), lpbm::Error);
    EXPECT_THROW(lpbm::run_campaign(lpbm::campaign_from_json(lpbm::Json::parse(R"({"instances": 0})"))), lpbm::Error);
    EXPECT_THROW(lpbm::campaign_from_json(lpbm::Json::parse(R"({"instances": 3, "pair": "x"})")), lpbm::Error);
    const auto c = lpbm::campaign_from_json(
        lpbm::Json::parse(R"({"dim": 3, "facets": 10, "instances": 4, "p_list": [0, 1], "seed": 9, "pair": "merge"})"));
    EXPECT_EQ(c.dim, 3);
    EXPECT_EQ(c.facets, 10);
    EXPECT_EQ(c.p_list, (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.pair_mode, lpbm::PairMode::Merge);
}
