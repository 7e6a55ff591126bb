#include "ccm/eventstudy.hpp"

#include "ccm/corpus.hpp"
#include "ccm/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

namespace ccm {

std::string_view to_string(FlowDefinition v) noexcept { return v == FlowDefinition::delta ? "delta" : "level"; }
std::string_view to_string(ClusterLevel v) noexcept { return v == ClusterLevel::fund ? "fund" : "country"; }
std::string_view to_string(OverlapPolicy v) noexcept { return v == OverlapPolicy::saturate ? "saturate" : "drop"; }
std::string_view to_string(PanelUnit v) noexcept { return v == PanelUnit::position ? "position" : "country"; }
std::string_view to_string(IntensityGroup v) noexcept { return v == IntensityGroup::L ? "L" : "R"; }

std::optional<FlowDefinition> parse_flow_definition(std::string_view s) noexcept {
    if (s == "delta") return FlowDefinition::delta;
    if (s == "level") return FlowDefinition::level;
    return std::nullopt;
}

std::optional<ClusterLevel> parse_cluster_level(std::string_view s) noexcept {
    if (s == "fund") return ClusterLevel::fund;
    if (s == "country") return ClusterLevel::country;
    return std::nullopt;
}

std::optional<OverlapPolicy> parse_overlap_policy(std::string_view s) noexcept {
    if (s == "saturate") return OverlapPolicy::saturate;
    if (s == "drop") return OverlapPolicy::drop;
    return std::nullopt;
}

std::optional<PanelUnit> parse_panel_unit(std::string_view s) noexcept {
    if (s == "position") return PanelUnit::position;
    if (s == "country") return PanelUnit::country;
    return std::nullopt;
}

std::vector<FundHolding> load_holdings(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> f;
    if (!reader.next(f)) throw LoadError(1, "holdings file is empty");
    const std::vector<std::string> expected{"fund_id", "month", "country", "fund_size", "weight"};
    for (auto& h : f) h = std::string(trim(h));
    if (f != expected) throw LoadError(reader.line(), "holdings header must be fund_id,month,country,fund_size,weight");

    auto number = [&](const std::string& raw, const char* what) {
        std::string s(trim(raw));
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size() || !std::isfinite(v))
            throw LoadError(reader.line(), std::string(what) + " '" + s + "' is not a number");
        return v;
    };

    std::vector<FundHolding> out;
    std::set<std::tuple<std::string, MonthIndex, std::string>> seen;
    while (reader.next(f)) {
        if (f.size() == 1 && trim(f[0]).empty()) continue;
        if (f.size() != 5) throw LoadError(reader.line(), "expected 5 fields, got " + std::to_string(f.size()));
        FundHolding h;
        h.fund_id = std::string(trim(f[0]));
        if (h.fund_id.empty()) throw LoadError(reader.line(), "empty fund_id");
        auto m = parse_month(trim(f[1]));
        if (!m) throw LoadError(reader.line(), "month '" + f[1] + "' is not YYYY-MM");
        h.month = *m;
        h.country = normalize_country(f[2]);
        if (h.country.empty()) throw LoadError(reader.line(), "empty country");
        h.fund_size = number(f[3], "fund_size");
        h.weight = number(f[4], "weight");
        if (h.fund_size < 0) throw LoadError(reader.line(), "fund_size must be non-negative");
        if (h.weight < 0 || h.weight > 1) throw LoadError(reader.line(), "weight must lie in [0,1]");
        if (!seen.emplace(h.fund_id, h.month, h.country).second)
            throw LoadError(reader.line(), "repeated holding for fund " + h.fund_id + " in " + h.country + " at " +
                                               format_month(h.month));
        out.push_back(std::move(h));
    }
    if (in.bad()) throw IoError("read error in holdings stream");
    return out;
}

namespace {

struct UnitKey {
    std::string country;
    std::string fund_id;
    auto operator<=>(const UnitKey&) const = default;
};

std::vector<PanelRow> flows_by(const std::vector<FundHolding>& holdings, FlowDefinition def, bool per_position) {
    std::map<UnitKey, std::map<MonthIndex, double>> allocated;
    for (const auto& h : holdings)
        allocated[{h.country, per_position ? h.fund_id : std::string()}][h.month] += h.fund_size * h.weight;

    std::vector<PanelRow> rows;
    for (const auto& [key, series] : allocated) {
        for (auto it = series.begin(); it != series.end(); ++it) {
            PanelRow r;
            r.country = key.country;
            r.fund_id = key.fund_id;
            r.unit = per_position ? key.fund_id + "|" + key.country : key.country;
            r.month = it->first;
            if (def == FlowDefinition::level) {
                r.flow = it->second;
                r.total_size = it->second;
            } else {
                auto prev = series.find(it->first - 1);
                if (prev == series.end()) continue;
                r.flow = it->second - prev->second;
                r.total_size = prev->second;
            }
            if (r.total_size > 0) r.flowpct = r.flow / r.total_size;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

}  // namespace

std::vector<PanelRow> compute_flows(const std::vector<FundHolding>& holdings, FlowDefinition def) {
    return flows_by(holdings, def, false);
}

std::vector<PanelRow> compute_position_flows(const std::vector<FundHolding>& holdings, FlowDefinition def) {
    return flows_by(holdings, def, true);
}

EventSelection select_events(const std::vector<CcmEvent>& events, const std::set<std::string>& countries) {
    EventSelection sel;
    std::map<std::tuple<std::string, MonthIndex, IntensityGroup>, std::size_t> pos;
    for (const auto& e : events) {
        if (e.action_direction != FlowDirection::inward) {
            ++sel.not_inward;
            continue;
        }
        if (e.action_intensity == Intensity::neutral) {
            ++sel.neutral;
            continue;
        }
        if (!e.date) {
            ++sel.undated;
            continue;
        }
        if (!countries.empty() && !countries.count(e.country)) {
            ++sel.filtered_country;
            continue;
        }
        IntensityGroup g = e.action_intensity == Intensity::liberalizing ? IntensityGroup::L : IntensityGroup::R;
        auto key = std::tuple(e.country, month_index(*e.date), g);
        auto [it, fresh] = pos.emplace(key, sel.events.size());
        if (fresh) {
            sel.events.push_back({e.country, month_index(*e.date), g, {e.id}});
        } else {
            sel.events[it->second].source_ids.push_back(e.id);
            ++sel.collapsed;
        }
    }
    std::sort(sel.events.begin(), sel.events.end(), [](const EventSpec& a, const EventSpec& b) {
        return std::tie(a.country, a.event_month, a.group) < std::tie(b.country, b.event_month, b.group);
    });
    return sel;
}

EventFrame build_event_frame(const std::vector<PanelRow>& panel, const std::vector<EventSpec>& events, int window,
                             OverlapPolicy overlap) {
    if (window < 0) throw ValidationError("event window must be non-negative");
    EventFrame frame;
    frame.window = window;

    if (overlap == OverlapPolicy::drop) {
        for (std::size_t i = 0; i < events.size(); ++i) {
            bool clash = false;
            for (std::size_t j = 0; j < events.size() && !clash; ++j)
                clash = j != i && events[j].country == events[i].country &&
                        std::abs(events[j].event_month - events[i].event_month) <= 2 * window;
            if (clash)
                ++frame.dropped_overlapping;
            else
                frame.events.push_back(events[i]);
        }
    } else {
        frame.events = events;
    }

    std::map<std::pair<std::string, MonthIndex>, std::vector<std::size_t>> by_country_month;
    for (const auto& r : panel) {
        if (!r.flowpct) {
            ++frame.undefined_rows;
            continue;
        }
        by_country_month[{r.country, r.month}].push_back(frame.rows.size());
        frame.rows.push_back(r);
    }
    frame.tags.assign(frame.rows.size(), {});

    for (const auto& e : frame.events) frame.accounting[e.group].events++;
    for (std::size_t ei = 0; ei < frame.events.size(); ++ei) {
        const auto& e = frame.events[ei];
        auto& acc = frame.accounting[e.group];
        for (int tau = -window; tau <= window; ++tau) {
            auto it = by_country_month.find({e.country, e.event_month + tau});
            if (it == by_country_month.end()) {
                ++acc.missing;
                continue;
            }
            ++acc.emitted;
            for (auto row : it->second) {
                frame.tags[row].push_back({tau, e.group, ei});
                ++acc.tagged_rows;
            }
        }
    }
    return frame;
}

std::vector<MeanCell> descriptive_means(const EventFrame& frame) {
    std::map<std::pair<IntensityGroup, int>, std::vector<double>> cells;
    for (const auto& [group, acc] : frame.accounting)
        for (int tau = -frame.window; tau <= frame.window; ++tau) cells[{group, tau}];
    for (std::size_t i = 0; i < frame.rows.size(); ++i)
        for (const auto& t : frame.tags[i]) cells[{t.group, t.tau}].push_back(*frame.rows[i].flowpct);

    std::vector<MeanCell> out;
    for (const auto& [key, values] : cells) {
        MeanCell c;
        c.group = key.first;
        c.tau = key.second;
        c.n = values.size();
        if (c.n == 0) {
            c.mean = std::numeric_limits<double>::quiet_NaN();
        } else {
            double sum = 0;
            for (double v : values) sum += v;
            c.mean = sum / static_cast<double>(c.n);
            if (c.n >= 2) {
                double ss = 0;
                for (double v : values) ss += (v - c.mean) * (v - c.mean);
                double s = std::sqrt(ss / static_cast<double>(c.n - 1));
                c.ci_half_width = 1.96 * s / std::sqrt(static_cast<double>(c.n));
            }
        }
        out.push_back(c);
    }
    return out;
}

std::string dummy_name(int tau, IntensityGroup group) {
    return "tau=" + std::string(tau > 0 ? "+" : "") + std::to_string(tau) + ",group=" + std::string(to_string(group));
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

}  // namespace

void write_coefficients_csv(std::ostream& out, const EventStudyResult& result) {
    out << "tau,group,beta,se,ci_lo,ci_hi\n";
    for (const auto& c : result.coefficients)
        out << c.tau << ',' << to_string(c.group) << ',' << num(c.beta) << ',' << num(c.se) << ',' << num(c.ci_lo)
            << ',' << num(c.ci_hi) << '\n';
}

void write_means_csv(std::ostream& out, const std::vector<MeanCell>& means) {
    out << "tau,group,mean,ci_half_width,n\n";
    for (const auto& c : means)
        out << c.tau << ',' << to_string(c.group) << ',' << num(c.mean) << ','
            << (c.ci_half_width ? num(*c.ci_half_width) : "NA") << ',' << c.n << '\n';
}

}  // namespace ccm
