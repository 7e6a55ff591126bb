#include "ccm/stats.hpp"

#include "doctest.h"

#include <random>
#include <sstream>

using namespace ccm;

namespace {

std::vector<CcmEvent> random_events(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    static const std::vector<std::string> regions{"Europe", "Africa", "Asia"};
    std::vector<CcmEvent> out;
    for (std::size_t i = 0; i < n; ++i) {
        CcmEvent e;
        e.id = std::to_string(i);
        e.year = 2000 + static_cast<int>(rng() % 5) * 2;
        e.country = "C" + std::to_string(rng() % 7);
        if (rng() % 4) e.region = regions[rng() % regions.size()];
        if (rng() % 3) e.income_group = rng() % 2 ? "Advanced" : "Emerging";
        e.category_index = "XI.A." + std::to_string(1 + rng() % 4);
        e.category = "cat";
        e.action = kAllActions[rng() % kAllActions.size()];
        e.action_intensity = static_cast<Intensity>(rng() % 4);
        e.action_direction = static_cast<FlowDirection>(rng() % 4);
        out.push_back(e);
    }
    return out;
}

}  // namespace

TEST_CASE("count tables sum to the number of events") {
    auto events = random_events(500, 3);
    auto s = event_stats(events);
    CHECK(s.by_year_category.total() == 500);
    CHECK(s.by_year_region.total() == 500);
    CHECK(s.by_year_intensity_income.total() == 500);
    CHECK(s.by_year_direction_income.total() == 500);
    bool unknown = false;
    for (const auto& [k, v] : s.by_year_region.counts) unknown |= k.at(1) == "unknown";
    CHECK(unknown);
    CHECK(s.by_year_region.columns == std::vector<std::string>{"year", "region"});
}

TEST_CASE("cumulative counts cover every year and never decrease") {
    auto s = event_stats(random_events(300, 8));
    // Years 2000..2008 inclusive, gaps filled.
    CHECK(s.cumulative_by_action.size() == 9 * kAllActions.size());
    std::map<Action, std::size_t> last;
    std::size_t total = 0;
    for (const auto& r : s.cumulative_by_action) {
        CHECK(r.cumulative >= last[r.action]);
        CHECK(r.cumulative == last[r.action] + r.count);
        last[r.action] = r.cumulative;
        total += r.count;
    }
    CHECK(total == 300);
}

TEST_CASE("csv output") {
    CcmEvent e;
    e.year = 2016;
    e.region = "Europe, Central";
    CountTable t = event_stats({e}).by_year_region;
    std::ostringstream os;
    write_count_csv(os, t);
    CHECK(os.str() == "year,region,count\n2016,\"Europe, Central\",1\n");
    CHECK(event_stats({}).cumulative_by_action.empty());
}
