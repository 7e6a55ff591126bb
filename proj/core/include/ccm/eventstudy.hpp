#pragma once

#include "ccm/event.hpp"
#include "ccm/text.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ccm {

/// One fund's position in one country for one month.
struct FundHolding {
    std::string fund_id;
    MonthIndex month = 0;
    std::string country;
    double fund_size = 0.0;  // total net assets
    double weight = 0.0;     // share of the fund allocated to the country
};

/// CSV with header fund_id,month,country,fund_size,weight. Months are
/// YYYY-MM; country names are normalized. Throws LoadError on bad rows or a
/// repeated (fund, month, country).
std::vector<FundHolding> load_holdings(std::istream& in);

enum class FlowDefinition { delta, level };
enum class ClusterLevel { fund, country };
enum class OverlapPolicy { saturate, drop };
enum class PanelUnit { position, country };
enum class IntensityGroup { L, R };

std::string_view to_string(FlowDefinition v) noexcept;
std::string_view to_string(ClusterLevel v) noexcept;
std::string_view to_string(OverlapPolicy v) noexcept;
std::string_view to_string(PanelUnit v) noexcept;
std::string_view to_string(IntensityGroup v) noexcept;
std::optional<FlowDefinition> parse_flow_definition(std::string_view s) noexcept;
std::optional<ClusterLevel> parse_cluster_level(std::string_view s) noexcept;
std::optional<OverlapPolicy> parse_overlap_policy(std::string_view s) noexcept;
std::optional<PanelUnit> parse_panel_unit(std::string_view s) noexcept;

/// Monthly flow observation for one unit (a country, or a fund's position
/// in a country).
struct PanelRow {
    std::string unit;
    std::string country;
    std::string fund_id;  // empty for country-level rows
    MonthIndex month = 0;
    double flow = 0.0;
    double total_size = 0.0;
    std::optional<double> flowpct;  // nullopt when total_size <= 0
};

/// Country-level flows. Allocated assets A(i,t) = sum_j size(j,t) * weight(j,i,t).
/// level: flow = total = A(i,t). delta: flow = A(i,t) - A(i,t-1) and
/// total = A(i,t-1); a country-month without the previous month is undefined.
/// Rows are ordered by (country, month).
std::vector<PanelRow> compute_flows(const std::vector<FundHolding>& holdings,
                                    FlowDefinition def = FlowDefinition::level);

/// Same formulas per (fund, country) position; unit is "fund|country".
std::vector<PanelRow> compute_position_flows(const std::vector<FundHolding>& holdings,
                                             FlowDefinition def = FlowDefinition::delta);

struct EventSpec {
    std::string country;
    MonthIndex event_month = 0;
    IntensityGroup group = IntensityGroup::R;
    std::vector<std::string> source_ids;
};

struct EventSelection {
    std::vector<EventSpec> events;  // ordered by (country, month, group)
    std::size_t not_inward = 0;
    std::size_t neutral = 0;
    std::size_t undated = 0;
    std::size_t filtered_country = 0;
    std::size_t collapsed = 0;  // merged into an earlier same country-month-group event
};

/// Inward events with a non-neutral intensity, dated by their effective
/// date. Restrictive and conditional form group R, liberalizing group L.
/// An empty country filter admits every country.
EventSelection select_events(const std::vector<CcmEvent>& events, const std::set<std::string>& countries = {});

struct FrameTag {
    int tau = 0;
    IntensityGroup group = IntensityGroup::R;
    std::size_t event = 0;  // position in EventFrame::events
};

struct WindowAccounting {
    std::size_t events = 0;
    std::size_t emitted = 0;  // (event, tau) slots with at least one panel row
    std::size_t missing = 0;  // slots with no defined panel row
    std::size_t tagged_rows = 0;
};

/// Estimation sample: every panel row with a defined flowpct, each carrying
/// the event-time tags that cover it.
struct EventFrame {
    int window = 6;
    std::vector<EventSpec> events;  // after the overlap policy
    std::vector<PanelRow> rows;
    std::vector<std::vector<FrameTag>> tags;  // parallel to rows
    std::map<IntensityGroup, WindowAccounting> accounting;
    std::size_t undefined_rows = 0;           // panel rows dropped for an undefined flowpct
    std::size_t dropped_overlapping = 0;      // events removed under OverlapPolicy::drop
};

/// Tags panel rows at event_month + tau for tau in [-window, window].
/// Under OverlapPolicy::drop, events whose windows intersect another event of
/// the same country are removed first.
EventFrame build_event_frame(const std::vector<PanelRow>& panel, const std::vector<EventSpec>& events, int window = 6,
                             OverlapPolicy overlap = OverlapPolicy::saturate);

struct EventStudyOptions {
    ClusterLevel cluster = ClusterLevel::country;
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

struct Coefficient {
    int tau = 0;
    IntensityGroup group = IntensityGroup::R;
    double beta = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct MeanCell {
    int tau = 0;
    IntensityGroup group = IntensityGroup::R;
    std::size_t n = 0;
    double mean = 0.0;                     // NaN when n == 0
    std::optional<double> ci_half_width;  // needs n >= 2
};

struct EventStudyResult {
    std::vector<Coefficient> coefficients;  // by group, then tau
    ClusterLevel cluster = ClusterLevel::country;
    std::size_t observations = 0;
    std::size_t clusters = 0;
    std::size_t units = 0;
    std::size_t months = 0;
    std::size_t parameters = 0;  // slopes plus absorbed fixed effects
    int demean_iterations = 0;
    std::map<IntensityGroup, std::size_t> n_events;
    std::vector<MeanCell> means;
};

/// Two-way (unit, month) fixed-effects regression of flowpct on
/// tau-by-group dummies. Dummies exist only for groups with events.
/// Throws ValidationError on rank deficiency (naming the dummies), on fewer
/// than two clusters, or when fund clustering is asked of country rows.
EventStudyResult estimate_event_study(const EventFrame& frame, const EventStudyOptions& options = {});

/// Mean flowpct per (tau, group) with mean +/- 1.96 * s / sqrt(n).
std::vector<MeanCell> descriptive_means(const EventFrame& frame);

/// Alternating projections onto unit and month means, applied to every
/// column until the largest change is below tol. Returns iterations used;
/// throws ValidationError when max_iterations is reached first.
int demean_two_way(Eigen::MatrixXd& columns, const std::vector<int>& unit, const std::vector<int>& month,
                   double tol = 1e-10, int max_iterations = 10000);

/// Cluster-robust covariance (CR1 scaling) of an OLS fit with `absorbed`
/// extra parameters already partialled out of X.
Eigen::MatrixXd cluster_robust_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                    const std::vector<int>& cluster, std::size_t absorbed);

/// "tau=+1,group=R" style label.
std::string dummy_name(int tau, IntensityGroup group);

void write_coefficients_csv(std::ostream& out, const EventStudyResult& result);
void write_means_csv(std::ostream& out, const std::vector<MeanCell>& means);

}  // namespace ccm
