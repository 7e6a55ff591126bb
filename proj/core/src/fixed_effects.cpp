#include "ccm/error.hpp"
#include "ccm/eventstudy.hpp"

#include <cmath>
#include <map>

namespace ccm {

namespace {

void subtract_group_means(Eigen::MatrixXd& m, const std::vector<int>& group, int n_groups) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_groups, m.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_groups);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        sums.row(group[i]) += m.row(i);
        counts[group[i]] += 1.0;
    }
    for (int g = 0; g < n_groups; ++g)
        if (counts[g] > 0) sums.row(g) /= counts[g];
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) -= sums.row(group[i]);
}

int count_groups(const std::vector<int>& g) {
    int n = 0;
    for (int v : g) n = std::max(n, v + 1);
    return n;
}

template <class Key>
std::vector<int> encode(const std::vector<Key>& keys, std::size_t& distinct) {
    std::map<Key, int> ids;
    for (const auto& k : keys) ids.emplace(k, 0);
    int next = 0;
    for (auto& [k, id] : ids) id = next++;
    std::vector<int> out;
    out.reserve(keys.size());
    for (const auto& k : keys) out.push_back(ids.at(k));
    distinct = ids.size();
    return out;
}

}  // namespace

int demean_two_way(Eigen::MatrixXd& columns, const std::vector<int>& unit, const std::vector<int>& month, double tol,
                   int max_iterations) {
    if (static_cast<std::size_t>(columns.rows()) != unit.size() || unit.size() != month.size())
        throw ValidationError("fixed-effect codes do not match the number of rows");
    const int n_units = count_groups(unit);
    const int n_months = count_groups(month);
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::MatrixXd before = columns;
        subtract_group_means(columns, unit, n_units);
        subtract_group_means(columns, month, n_months);
        double change = columns.size() == 0 ? 0.0 : (columns - before).cwiseAbs().maxCoeff();
        if (change < tol) return it;
    }
    throw ValidationError("two-way demeaning did not converge within " + std::to_string(max_iterations) +
                          " iterations");
}

Eigen::MatrixXd cluster_robust_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                    const std::vector<int>& cluster, std::size_t absorbed) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto k = static_cast<std::size_t>(X.cols()) + absorbed;
    const int g = count_groups(cluster);
    if (g < 2) throw ValidationError("clustered variance needs at least two clusters, got " + std::to_string(g));
    if (n <= k) throw ValidationError("too few observations (" + std::to_string(n) + ") for " + std::to_string(k) +
                                      " parameters");
    Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(g, X.cols());
    for (std::size_t i = 0; i < n; ++i) scores.row(cluster[i]) += X.row(static_cast<Eigen::Index>(i)) * residuals[static_cast<Eigen::Index>(i)];
    Eigen::MatrixXd meat = scores.transpose() * scores;
    const double G = g;
    const double scale = G / (G - 1.0) * (static_cast<double>(n) - 1.0) / static_cast<double>(n - k);
    return scale * bread * meat * bread;
}

EventStudyResult estimate_event_study(const EventFrame& frame, const EventStudyOptions& options) {
    if (frame.rows.empty()) throw ValidationError("event frame has no observations");
    EventStudyResult res;
    res.cluster = options.cluster;
    for (const auto& [group, acc] : frame.accounting) res.n_events[group] = acc.events;

    std::vector<std::pair<IntensityGroup, int>> dummies;
    for (const auto& [group, acc] : frame.accounting)
        if (acc.events > 0)
            for (int tau = -frame.window; tau <= frame.window; ++tau) dummies.emplace_back(group, tau);
    if (dummies.empty()) throw ValidationError("no events to estimate");
    std::map<std::pair<IntensityGroup, int>, Eigen::Index> col;
    for (std::size_t c = 0; c < dummies.size(); ++c) col[dummies[c]] = static_cast<Eigen::Index>(c);

    const auto n = static_cast<Eigen::Index>(frame.rows.size());
    const auto p = static_cast<Eigen::Index>(dummies.size());
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(n, p + 1);
    std::vector<std::string> units, months_keys, cluster_keys;
    std::vector<MonthIndex> months;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = frame.rows[static_cast<std::size_t>(i)];
        data(i, 0) = *r.flowpct;
        for (const auto& t : frame.tags[static_cast<std::size_t>(i)]) data(i, 1 + col.at({t.group, t.tau})) = 1.0;
        units.push_back(r.unit);
        months.push_back(r.month);
        if (options.cluster == ClusterLevel::fund) {
            if (r.fund_id.empty()) throw ValidationError("fund clustering needs fund-level panel rows");
            cluster_keys.push_back(r.fund_id);
        } else {
            cluster_keys.push_back(r.country);
        }
    }

    std::vector<std::string> empty;
    for (Eigen::Index c = 0; c < p; ++c)
        if (data.col(c + 1).cwiseAbs().maxCoeff() == 0.0)
            empty.push_back(dummy_name(dummies[static_cast<std::size_t>(c)].second, dummies[static_cast<std::size_t>(c)].first));
    if (!empty.empty()) {
        std::string names;
        for (const auto& s : empty) names += (names.empty() ? "" : "; ") + s;
        throw ValidationError("rank deficient design: all-zero dummies " + names);
    }

    auto unit_code = encode(units, res.units);
    auto month_code = encode(months, res.months);
    auto cluster_code = encode(cluster_keys, res.clusters);
    res.observations = static_cast<std::size_t>(n);

    res.demean_iterations = demean_two_way(data, unit_code, month_code, options.tolerance, options.max_iterations);
    Eigen::VectorXd y = data.col(0);
    Eigen::MatrixXd X = data.rightCols(p);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-9);
    if (qr.rank() < p) {
        std::string names;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index c = qr.rank(); c < p; ++c) {
            const auto& d = dummies[static_cast<std::size_t>(perm[c])];
            names += (names.empty() ? "" : "; ") + dummy_name(d.second, d.first);
        }
        throw ValidationError("rank deficient design after absorbing fixed effects: collinear dummies " + names);
    }
    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd resid = y - X * beta;

    res.parameters = static_cast<std::size_t>(p) + res.units + res.months - 1;
    Eigen::MatrixXd V = cluster_robust_vcov(X, resid, cluster_code, res.units + res.months - 1);
    for (Eigen::Index c = 0; c < p; ++c) {
        Coefficient k;
        k.group = dummies[static_cast<std::size_t>(c)].first;
        k.tau = dummies[static_cast<std::size_t>(c)].second;
        k.beta = beta[c];
        k.se = std::sqrt(std::max(0.0, V(c, c)));
        k.ci_lo = k.beta - 1.96 * k.se;
        k.ci_hi = k.beta + 1.96 * k.se;
        res.coefficients.push_back(k);
    }
    res.means = descriptive_means(frame);
    return res;
}

}  // namespace ccm
