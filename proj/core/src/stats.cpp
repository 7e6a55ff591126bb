#include "ccm/stats.hpp"

#include "ccm/text.hpp"

#include <algorithm>
#include <ostream>

namespace ccm {

std::size_t CountTable::total() const noexcept {
    std::size_t n = 0;
    for (const auto& [k, c] : counts) n += c;
    return n;
}

EventStats event_stats(const std::vector<CcmEvent>& events) {
    EventStats s;
    s.by_year_category.columns = {"year", "category_index", "category"};
    s.by_year_region.columns = {"year", "region"};
    s.by_year_intensity_income.columns = {"year", "intensity", "income_group"};
    s.by_year_direction_income.columns = {"year", "direction", "income_group"};

    std::map<std::pair<int, Action>, std::size_t> per_action;
    int first = 0, last = -1;
    for (const auto& e : events) {
        const std::string year = std::to_string(e.year);
        const std::string income = e.income_group.value_or("unknown");
        s.by_year_category.counts[{year, e.category_index.value_or("unknown"), e.category}]++;
        s.by_year_region.counts[{year, e.region.value_or("unknown")}]++;
        s.by_year_intensity_income.counts[{year, std::string(to_string(e.action_intensity)), income}]++;
        s.by_year_direction_income.counts[{year, std::string(to_string(e.action_direction)), income}]++;
        per_action[{e.year, e.action}]++;
        if (last < first) first = last = e.year;
        first = std::min(first, e.year);
        last = std::max(last, e.year);
    }
    std::map<Action, std::size_t> running;
    for (int y = first; y <= last; ++y) {
        for (Action a : kAllActions) {
            auto it = per_action.find({y, a});
            std::size_t c = it == per_action.end() ? 0 : it->second;
            running[a] += c;
            s.cumulative_by_action.push_back({y, a, c, running[a]});
        }
    }
    return s;
}

void write_count_csv(std::ostream& out, const CountTable& table) {
    std::vector<std::string> header = table.columns;
    header.push_back("count");
    out << csv_row(header) << '\n';
    for (const auto& [key, count] : table.counts) {
        std::vector<std::string> row = key;
        row.push_back(std::to_string(count));
        out << csv_row(row) << '\n';
    }
}

void write_cumulative_csv(std::ostream& out, const std::vector<CumulativeRow>& rows) {
    out << "year,action,count,cumulative\n";
    for (const auto& r : rows)
        out << r.year << ',' << csv_escape(to_string(r.action)) << ',' << r.count << ',' << r.cumulative << '\n';
}

}  // namespace ccm
