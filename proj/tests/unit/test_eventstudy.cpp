#include "ccm/error.hpp"
#include "ccm/eventstudy.hpp"

#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>
#include <sstream>

using namespace ccm;

namespace {

constexpr MonthIndex kBase = 24000;

CcmEvent event(const std::string& country, Intensity intensity, FlowDirection dir, std::optional<Date> date,
               const std::string& id = "e") {
    CcmEvent e;
    e.id = id;
    e.country = country;
    e.action_intensity = intensity;
    e.action_direction = dir;
    e.date = date;
    return e;
}

EventSpec spec(int country, int offset, IntensityGroup g = IntensityGroup::R) {
    return {fixtures::country_name(country), kBase + offset, g, {}};
}

// Slope design in the estimator's column order: groups with events (L before
// R), tau ascending.
Eigen::MatrixXd slope_design(const EventFrame& f) {
    std::vector<IntensityGroup> groups;
    for (const auto& [g, acc] : f.accounting)
        if (acc.events) groups.push_back(g);
    const int width = 2 * f.window + 1;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(f.rows.size()),
                                              static_cast<Eigen::Index>(groups.size()) * width);
    for (std::size_t i = 0; i < f.rows.size(); ++i)
        for (const auto& t : f.tags[i]) {
            auto gi = std::find(groups.begin(), groups.end(), t.group) - groups.begin();
            X(static_cast<Eigen::Index>(i), gi * width + t.tau + f.window) = 1.0;
        }
    return X;
}

template <class F>
std::vector<int> codes(const EventFrame& f, F key) {
    std::map<std::string, int> ids;
    std::vector<int> out;
    for (const auto& r : f.rows) out.push_back(ids.emplace(key(r), static_cast<int>(ids.size())).first->second);
    return out;
}

}  // namespace

TEST_CASE("flows from holdings") {
    std::vector<FundHolding> h{{"F1", kBase, "Chile", 100, 0.1}, {"F1", kBase + 1, "Chile", 100, 0.2},
                               {"F2", kBase + 1, "Chile", 50, 0.0}};
    auto level = compute_flows(h, FlowDefinition::level);
    REQUIRE(level.size() == 2);
    CHECK(level[0].flow == doctest::Approx(10));
    CHECK(level[1].flow == doctest::Approx(20));
    CHECK(*level[1].flowpct == doctest::Approx(1.0));
    auto delta = compute_flows(h, FlowDefinition::delta);
    REQUIRE(delta.size() == 1);
    CHECK(delta[0].flow == doctest::Approx(10));
    CHECK(delta[0].total_size == doctest::Approx(10));
    CHECK(*delta[0].flowpct == doctest::Approx(1.0));
    auto pos = compute_position_flows(h, FlowDefinition::delta);
    REQUIRE(pos.size() == 1);
    CHECK(pos[0].unit == "F1|Chile");
    CHECK(pos[0].fund_id == "F1");
    auto zero = compute_position_flows(h, FlowDefinition::level);
    REQUIRE(zero.size() == 3);
    CHECK_FALSE(zero[2].flowpct.has_value());
}

TEST_CASE("holdings loader") {
    std::istringstream ok("fund_id,month,country,fund_size,weight\nF1,2015-01,Türkiye,100,0.5\n");
    auto h = load_holdings(ok);
    REQUIRE(h.size() == 1);
    CHECK(h[0].country == "Turkey");
    CHECK(h[0].month == month_index(Date{2015, 1, 1}));
    std::istringstream bad("fund_id,month,country,fund_size,weight\nF1,2015-01,Chile,100,0.5\nF1,2015-13,Chile,1,0\n");
    try {
        load_holdings(bad);
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream dup("fund_id,month,country,fund_size,weight\nF1,2015-01,Chile,1,0.5\nF1,2015-01,Chile,1,0.5\n");
    CHECK_THROWS_AS(load_holdings(dup), LoadError);
    std::istringstream weight("fund_id,month,country,fund_size,weight\nF1,2015-01,Chile,1,1.5\n");
    CHECK_THROWS_AS(load_holdings(weight), LoadError);
}

TEST_CASE("event selection") {
    std::vector<CcmEvent> evs{
        event("Chile", Intensity::restrictive, FlowDirection::inward, Date{2016, 3, 16}, "a"),
        event("Chile", Intensity::conditional, FlowDirection::inward, Date{2016, 3, 1}, "b"),
        event("Chile", Intensity::liberalizing, FlowDirection::inward, Date{2016, 3, 2}, "c"),
        event("Chile", Intensity::restrictive, FlowDirection::outward, Date{2016, 3, 2}, "d"),
        event("Chile", Intensity::neutral, FlowDirection::inward, Date{2016, 3, 2}, "e"),
        event("Chile", Intensity::restrictive, FlowDirection::inward, std::nullopt, "f"),
        event("Brazil", Intensity::restrictive, FlowDirection::inward, Date{2015, 1, 2}, "g"),
    };
    auto s = select_events(evs);
    REQUIRE(s.events.size() == 3);
    CHECK(s.events[0].country == "Brazil");
    CHECK(s.events[1].group == IntensityGroup::L);
    CHECK(s.events[2].source_ids == std::vector<std::string>{"a", "b"});
    CHECK(s.collapsed == 1);
    CHECK(s.not_inward == 1);
    CHECK(s.neutral == 1);
    CHECK(s.undated == 1);
    auto only = select_events(evs, {"Brazil"});
    CHECK(only.events.size() == 1);
    CHECK(only.filtered_country == 3);
}

TEST_CASE("window accounting") {
    auto p = fixtures::event_panel(2, 24, {}, {}, 0.0, 1);
    auto f = build_event_frame(p.rows, {spec(0, 2)}, 6);
    const auto& acc = f.accounting.at(IntensityGroup::R);
    CHECK(acc.events == 1);
    CHECK(acc.emitted == 9);
    CHECK(acc.missing == 4);
    CHECK(acc.emitted + acc.missing == 13);
    CHECK(acc.tagged_rows == 9);
    CHECK(f.rows.size() == 48);
    CHECK_FALSE(f.accounting.count(IntensityGroup::L));

    auto sat = build_event_frame(p.rows, {spec(0, 10), spec(0, 15)}, 6, OverlapPolicy::saturate);
    CHECK(sat.accounting.at(IntensityGroup::R).tagged_rows == 26);
    std::size_t doubly = 0;
    for (const auto& t : sat.tags) doubly += t.size() == 2;
    CHECK(doubly == 8);
    auto drop = build_event_frame(p.rows, {spec(0, 10), spec(0, 15), spec(1, 10)}, 6, OverlapPolicy::drop);
    CHECK(drop.events.size() == 1);
    CHECK(drop.dropped_overlapping == 2);
    CHECK_THROWS_AS(build_event_frame(p.rows, {}, -1), ValidationError);
}

TEST_CASE("estimator recovers an injected effect") {
    std::vector<EventSpec> events;
    for (int c = 0; c < 10; ++c) events.push_back(spec(c, 12 + 3 * c));
    auto p = fixtures::event_panel(20, 60, events, {{0, -0.08}, {1, -0.04}}, 0.002, 3);
    auto f = build_event_frame(p.rows, p.events, 6);
    auto r = estimate_event_study(f);
    REQUIRE(r.coefficients.size() == 13);
    for (const auto& c : r.coefficients) {
        double truth = c.tau == 0 ? -0.08 : c.tau == 1 ? -0.04 : 0.0;
        CHECK(std::abs(c.beta - truth) < 0.004);
        CHECK(c.ci_lo <= c.beta);
    }
    CHECK(r.clusters == 20);
    CHECK(r.units == 20);
    CHECK(r.months == 60);
    CHECK(r.parameters == 13 + 20 + 60 - 1);
    CHECK(r.n_events.at(IntensityGroup::R) == 10);
}

TEST_CASE("estimator matches the explicit dummy regression") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        std::vector<EventSpec> events{spec(0, 10), spec(1, 14, IntensityGroup::L), spec(2, 20), spec(3, 9),
                                      spec(4, 25, IntensityGroup::L), spec(0, 15, IntensityGroup::L)};
        auto p = fixtures::event_panel(8, 36, events, {{0, -0.05}}, 0.01, seed, 2);
        auto f = build_event_frame(p.rows, p.events, 3);
        for (auto level : {ClusterLevel::country, ClusterLevel::fund}) {
            EventStudyOptions o;
            o.cluster = level;
            auto r = estimate_event_study(f, o);
            Eigen::VectorXd y(static_cast<Eigen::Index>(f.rows.size()));
            for (std::size_t i = 0; i < f.rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = *f.rows[i].flowpct;
            Eigen::MatrixXd X = slope_design(f);
            auto units = codes(f, [](const PanelRow& r) { return r.unit; });
            auto months = codes(f, [](const PanelRow& r) { return std::to_string(r.month); });
            auto cl = level == ClusterLevel::fund ? codes(f, [](const PanelRow& r) { return r.fund_id; })
                                                  : codes(f, [](const PanelRow& r) { return r.country; });
            auto fit = oracle::dummy_regression(y, X, units, months);
            Eigen::MatrixXd V = oracle::cr1_vcov(fit, static_cast<std::size_t>(X.cols()), cl);
            REQUIRE(r.coefficients.size() == static_cast<std::size_t>(X.cols()));
            for (Eigen::Index c = 0; c < X.cols(); ++c) {
                const auto& k = r.coefficients[static_cast<std::size_t>(c)];
                CHECK(std::abs(k.beta - fit.beta[c]) < 1e-8);
                CHECK(std::abs(k.se - std::sqrt(V(c, c))) < 1e-8);
            }
        }
    }
}

TEST_CASE("CR1 with one observation per cluster equals HC1") {
    auto p = fixtures::event_panel(6, 20, {spec(0, 5), spec(2, 9)}, {{0, 0.1}}, 0.02, 9);
    auto f = build_event_frame(p.rows, p.events, 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(f.rows.size()));
    for (std::size_t i = 0; i < f.rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = *f.rows[i].flowpct;
    Eigen::MatrixXd X = slope_design(f);
    auto units = codes(f, [](const PanelRow& r) { return r.unit; });
    auto months = codes(f, [](const PanelRow& r) { return std::to_string(r.month); });
    auto fit = oracle::dummy_regression(y, X, units, months);

    Eigen::MatrixXd data(X.rows(), X.cols() + 1);
    data << y, X;
    demean_two_way(data, units, months);
    Eigen::MatrixXd Xd = data.rightCols(X.cols());
    Eigen::VectorXd resid = data.col(0) - Xd * fit.beta;
    std::vector<int> own(static_cast<std::size_t>(X.rows()));
    for (std::size_t i = 0; i < own.size(); ++i) own[i] = static_cast<int>(i);
    Eigen::MatrixXd V = cluster_robust_vcov(Xd, resid, own, 6 + 20 - 1);
    Eigen::MatrixXd H = oracle::hc1_vcov(fit, static_cast<std::size_t>(X.cols()));
    CHECK((V - H).cwiseAbs().maxCoeff() < 1e-10);

    std::vector<int> one(own.size(), 0);
    CHECK_THROWS_AS(cluster_robust_vcov(Xd, resid, one, 0), ValidationError);
}

TEST_CASE("rank problems name the offending dummies") {
    auto p = fixtures::event_panel(4, 24, {}, {}, 0.01, 2);
    try {
        estimate_event_study(build_event_frame(p.rows, {spec(0, 0)}, 2));
        FAIL("expected rank error");
    } catch (const ValidationError& e) {
        std::string m = e.what();
        CHECK(m.find("tau=-2,group=R") != std::string::npos);
        CHECK(m.find("tau=-1,group=R") != std::string::npos);
        CHECK(m.find("tau=+1,group=R") == std::string::npos);
    }
    std::vector<EventSpec> same;
    for (int c = 0; c < 4; ++c) same.push_back(spec(c, 10));
    try {
        estimate_event_study(build_event_frame(p.rows, same, 0));
        FAIL("expected collinearity error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("tau=0,group=R") != std::string::npos);
    }
    EventStudyOptions fund;
    fund.cluster = ClusterLevel::fund;
    CHECK_THROWS_AS(estimate_event_study(build_event_frame(p.rows, {spec(0, 10)}, 1), fund), ValidationError);
    CHECK_THROWS_AS(estimate_event_study(build_event_frame(p.rows, {}, 1)), ValidationError);
}

TEST_CASE("scaling the outcome scales coefficients and errors") {
    std::vector<EventSpec> events{spec(0, 8), spec(1, 12), spec(2, 16)};
    auto p = fixtures::event_panel(6, 30, events, {{0, -0.03}}, 0.01, 4);
    auto base = estimate_event_study(build_event_frame(p.rows, events, 2));
    for (auto& r : p.rows) *r.flowpct *= 3.0;
    auto scaled = estimate_event_study(build_event_frame(p.rows, events, 2));
    for (std::size_t i = 0; i < base.coefficients.size(); ++i) {
        CHECK(scaled.coefficients[i].beta == doctest::Approx(3 * base.coefficients[i].beta));
        CHECK(scaled.coefficients[i].se == doctest::Approx(3 * base.coefficients[i].se));
    }
}

TEST_CASE("demeaning is idempotent") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(60, 3);
    std::vector<int> unit, month;
    for (int i = 0; i < 60; ++i) {
        unit.push_back(i % 5);
        month.push_back(i / 5);
        for (int c = 0; c < 3; ++c) m(i, c) = n(rng);
    }
    unit.pop_back();
    unit.push_back(1);  // unbalanced
    demean_two_way(m, unit, month);
    Eigen::MatrixXd again = m;
    CHECK(demean_two_way(again, unit, month) == 1);
    CHECK((again - m).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::MatrixXd slow = Eigen::MatrixXd::Random(60, 1);
    CHECK_THROWS_AS(demean_two_way(slow, unit, month, 1e-300, 1), ValidationError);
}

TEST_CASE("descriptive means") {
    auto p = fixtures::event_panel(4, 12, {}, {}, 0.0, 1);
    for (auto& r : p.rows) r.flowpct = 1.0;
    auto f = build_event_frame(p.rows, {spec(0, 5), spec(1, 5), spec(2, 5)}, 0);
    auto m = descriptive_means(f);
    REQUIRE(m.size() == 1);
    CHECK(m[0].n == 3);
    CHECK(m[0].mean == doctest::Approx(1.0));
    CHECK(*m[0].ci_half_width == doctest::Approx(0.0));

    for (auto& r : p.rows) r.flowpct = r.country == fixtures::country_name(0) ? 0.0 : 2.0;
    auto g = descriptive_means(build_event_frame(p.rows, {spec(0, 5), spec(1, 5)}, 0));
    CHECK(g[0].mean == doctest::Approx(1.0));
    CHECK(*g[0].ci_half_width == doctest::Approx(1.96));

    auto h = descriptive_means(build_event_frame(p.rows, {spec(0, 5)}, 1));
    REQUIRE(h.size() == 3);
    CHECK_FALSE(h[0].ci_half_width.has_value());
    std::ostringstream os;
    write_means_csv(os, h);
    CHECK(os.str().find("tau,group,mean,ci_half_width,n\n-1,R,0,NA,1\n") == 0);
}

TEST_CASE("enum names round trip") {
    CHECK(parse_cluster_level("fund") == ClusterLevel::fund);
    CHECK(parse_flow_definition("delta") == FlowDefinition::delta);
    CHECK(parse_overlap_policy("drop") == OverlapPolicy::drop);
    CHECK(parse_panel_unit("country") == PanelUnit::country);
    CHECK_FALSE(parse_cluster_level("region").has_value());
    CHECK(dummy_name(-3, IntensityGroup::L) == "tau=-3,group=L");
    CHECK(dummy_name(0, IntensityGroup::R) == "tau=0,group=R");
}
