#pragma once

#include "ccm/event.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ccm {

/// Event counts keyed by a tuple of string columns.
struct CountTable {
    std::vector<std::string> columns;  // key column names
    std::map<std::vector<std::string>, std::size_t> counts;

    std::size_t total() const noexcept;
};

/// Cumulative event count per action type, one row per (year, action) for
/// every year in the observed range.
struct CumulativeRow {
    int year = 0;
    Action action = Action::clarify;
    std::size_t count = 0;
    std::size_t cumulative = 0;
};

struct EventStats {
    CountTable by_year_category;          // year, category_index, category
    CountTable by_year_region;            // year, region
    std::vector<CumulativeRow> cumulative_by_action;
    CountTable by_year_intensity_income;  // year, intensity, income_group
    CountTable by_year_direction_income;  // year, direction, income_group
};

/// Missing metadata counts under "unknown".
EventStats event_stats(const std::vector<CcmEvent>& events);

void write_count_csv(std::ostream& out, const CountTable& table);
void write_cumulative_csv(std::ostream& out, const std::vector<CumulativeRow>& rows);

}  // namespace ccm
