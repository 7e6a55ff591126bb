#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace oracle {

std::vector<std::string> levels(const std::string& raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string s = raw.substr(b, e - b);
    while (!s.empty() && s.back() == '.') s.pop_back();
    std::vector<std::string> out;
    if (s.empty()) return {};
    std::string cur;
    for (char c : s + ".") {
        if (c == '.') {
            if (cur.empty()) return {};
            out.push_back(cur);
            cur.clear();
        } else if (std::isalnum(static_cast<unsigned char>(c)) && static_cast<unsigned char>(c) < 128) {
            cur += c;
        } else {
            return {};
        }
    }
    if (out.size() > 6) return {};
    return out;
}

bool capital_control(const std::string& raw) {
    auto l = levels(raw);
    return l.size() >= 2 && l[0] == "XI" && l[1] == "A";
}

namespace {

bool well_formed(const std::string& raw) { return raw == "NON-CAPITAL-CONTROL" || !levels(raw).empty(); }

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

std::pair<std::size_t, std::size_t> binary(const std::vector<RawPrediction>& rows) {
    std::size_t hit = 0;
    for (const auto& r : rows)
        if (well_formed(r.predicted_index) && capital_control(r.predicted_index) == capital_control(r.gold_index)) ++hit;
    return {hit, rows.size()};
}

std::pair<std::size_t, std::size_t> status(const std::vector<RawPrediction>& rows) {
    std::size_t hit = 0;
    for (const auto& r : rows) {
        std::string p = lower(r.predicted_status), g = lower(r.gold_status);
        if ((p == "yes" || p == "no") && p == g) ++hit;
    }
    return {hit, rows.size()};
}

std::pair<std::size_t, std::size_t> level(const std::vector<RawPrediction>& rows, std::size_t k) {
    std::size_t num = 0, den = 0;
    for (const auto& r : rows) {
        if (!capital_control(r.gold_index)) continue;
        auto g = levels(r.gold_index);
        if (g.size() < k) continue;
        ++den;
        auto p = levels(r.predicted_index);
        if (p.size() < k) continue;
        bool all = true;
        for (std::size_t i = 0; i < k; ++i) all = all && p[i] == g[i];
        if (all) ++num;
    }
    return {num, den};
}

Lsdv dummy_regression(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<int>& unit,
                      const std::vector<int>& month) {
    std::set<int> units(unit.begin(), unit.end()), months(month.begin(), month.end());
    std::map<int, int> ucol, mcol;
    int c = static_cast<int>(X.cols());
    for (int u : units) ucol[u] = c++;
    bool first = true;
    for (int m : months) {
        if (first) {
            first = false;
            continue;
        }
        mcol[m] = c++;
    }
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(X.rows(), c);
    D.leftCols(X.cols()) = X;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        D(i, ucol.at(unit[i])) = 1.0;
        if (mcol.count(month[i])) D(i, mcol.at(month[i])) = 1.0;
    }
    Lsdv fit;
    Eigen::VectorXd b = D.completeOrthogonalDecomposition().solve(y);
    fit.beta = b.head(X.cols());
    fit.design = D;
    fit.residuals = y - D * b;
    return fit;
}

Eigen::MatrixXd cr1_vcov(const Lsdv& fit, std::size_t slopes, const std::vector<int>& cluster) {
    const Eigen::MatrixXd& X = fit.design;
    const double n = static_cast<double>(X.rows());
    const double k = static_cast<double>(X.cols());
    std::map<int, Eigen::VectorXd> score;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        auto it = score.find(cluster[i]);
        if (it == score.end()) it = score.emplace(cluster[i], Eigen::VectorXd::Zero(X.cols())).first;
        it->second += X.row(i).transpose() * fit.residuals[i];
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (const auto& [g, s] : score) meat += s * s.transpose();
    const double G = static_cast<double>(score.size());
    Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    Eigen::MatrixXd v = (G / (G - 1.0)) * ((n - 1.0) / (n - k)) * bread * meat * bread;
    const auto p = static_cast<Eigen::Index>(slopes);
    return v.topLeftCorner(p, p);
}

Eigen::MatrixXd hc1_vcov(const Lsdv& fit, std::size_t slopes) {
    const Eigen::MatrixXd& X = fit.design;
    const double n = static_cast<double>(X.rows());
    const double k = static_cast<double>(X.cols());
    Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    Eigen::MatrixXd meat = X.transpose() * fit.residuals.array().square().matrix().asDiagonal() * X;
    Eigen::MatrixXd v = n / (n - k) * bread * meat * bread;
    const auto p = static_cast<Eigen::Index>(slopes);
    return v.topLeftCorner(p, p);
}

}  // namespace oracle
