#include "ccm/evaluation.hpp"

#include "ccm/error.hpp"
#include "ccm/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace ccm {

using json = nlohmann::json;

Label Label::parse(std::string_view raw) {
    std::string_view s = trim(raw);
    if (s == kOutOfTaxonomy) return {Kind::out_of_taxonomy, {}};
    try {
        return {Kind::index, parse_index(s).str()};
    } catch (const ParseError&) {
        return {Kind::unparseable, {}};
    }
}

bool Label::is_capital_control() const noexcept {
    return kind == Kind::index && ccm::is_capital_control(index);
}

std::vector<PredictionRecord> load_predictions(std::istream& in) {
    std::vector<PredictionRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw LoadError(lineno, "not a JSON object");
        auto str = [&](const char* key) -> std::optional<std::string> {
            if (!j.contains(key) || !j.at(key).is_string()) return std::nullopt;
            return j.at(key).get<std::string>();
        };
        PredictionRecord r;
        auto id = str("id");
        if (!id && j.contains("id") && j.at("id").is_number_integer()) id = std::to_string(j.at("id").get<long long>());
        if (!id) throw LoadError(lineno, "missing id");
        r.id = *id;
        r.model = str("model").value_or("");
        if (r.model.empty()) throw LoadError(lineno, "missing model");
        auto gold = str("gold_index");
        if (!gold) throw LoadError(lineno, "missing gold_index");
        r.gold = Label::parse(*gold);
        if (r.gold.kind == Label::Kind::unparseable) throw LoadError(lineno, "malformed gold_index '" + *gold + "'");
        auto gs = str("gold_status");
        auto gold_status = gs ? parse_status(*gs) : std::nullopt;
        if (!gold_status) throw LoadError(lineno, "malformed gold_status");
        r.gold_status = *gold_status;
        auto pi = str("predicted_index");
        r.predicted = pi ? Label::parse(*pi) : Label{};
        auto ps = str("predicted_status");
        r.predicted_status = ps ? parse_status(*ps) : std::nullopt;
        if (!seen.emplace(r.model, r.id).second)
            throw LoadError(lineno, "duplicate id '" + r.id + "' for model '" + r.model + "'");
        out.push_back(std::move(r));
    }
    if (in.bad()) throw IoError("read error in predictions stream");
    return out;
}

namespace {

void require_nonempty(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw ValidationError("no prediction records to score");
}

double fraction(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

double binary_accuracy(const std::vector<PredictionRecord>& records) {
    require_nonempty(records);
    std::size_t hit = 0;
    for (const auto& r : records)
        if (r.predicted.kind != Label::Kind::unparseable && r.predicted.is_capital_control() == r.gold.is_capital_control())
            ++hit;
    return fraction(hit, records.size());
}

double status_accuracy(const std::vector<PredictionRecord>& records) {
    require_nonempty(records);
    std::size_t hit = 0;
    for (const auto& r : records)
        if (r.predicted_status && *r.predicted_status == r.gold_status) ++hit;
    return fraction(hit, records.size());
}

LevelAccuracy hierarchical_accuracy(const std::vector<PredictionRecord>& records, std::size_t k) {
    if (k < 1 || k > kMaxIndexDepth) throw ValidationError("level must be in 1.." + std::to_string(kMaxIndexDepth));
    LevelAccuracy a;
    for (const auto& r : records) {
        if (!r.gold.is_capital_control()) continue;
        IndexPath gold = parse_index(r.gold.index);
        if (gold.depth() < k) continue;
        ++a.denominator;
        if (r.predicted.kind == Label::Kind::index && match_depth(parse_index(r.predicted.index), gold) >= k)
            ++a.numerator;
    }
    if (a.denominator > 0) a.accuracy = fraction(a.numerator, a.denominator);
    return a;
}

EvalReport evaluate_model(const std::string& model, const std::vector<PredictionRecord>& records) {
    EvalReport r;
    r.model = model;
    r.records = records.size();
    r.binary_accuracy = binary_accuracy(records);
    r.status_accuracy = status_accuracy(records);
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t k = 1; k <= kMaxIndexDepth; ++k) {
        r.levels[k] = hierarchical_accuracy(records, k);
        if (k >= kReportFirstLevel && k <= kReportLastLevel && r.levels[k].accuracy) {
            sum += *r.levels[k].accuracy;
            ++defined;
        }
    }
    if (defined > 0) r.average_l3_l6 = sum / static_cast<double>(defined);
    return r;
}

const std::array<std::string, kReportColumns>& report_column_names() {
    static const std::array<std::string, kReportColumns> names{"Binary Acc", "L3 Acc", "L4 Acc",
                                                               "L5 Acc",     "L6 Acc", "Avg (L3-L6)"};
    return names;
}

ReportRow report_row(const EvalReport& r) {
    ReportRow row;
    row[0] = r.binary_accuracy;
    for (std::size_t k = kReportFirstLevel; k <= kReportLastLevel; ++k) {
        auto it = r.levels.find(k);
        if (it != r.levels.end()) row[k - kReportFirstLevel + 1] = it->second.accuracy;
    }
    row[kReportColumns - 1] = r.average_l3_l6;
    return row;
}

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double scaled = value * scale;
    const double r = scaled >= 0 ? std::floor(scaled + 0.5 + 1e-9) : -std::floor(-scaled + 0.5 + 1e-9);
    return r / scale;
}

std::optional<DeltaRow> delta_over_best_baseline(const std::vector<EvalReport>& reports,
                                                 const std::string& designated) {
    auto self = std::find_if(reports.begin(), reports.end(), [&](const auto& r) { return r.model == designated; });
    if (self == reports.end()) throw ValidationError("designated model '" + designated + "' has no predictions");
    const EvalReport* best = nullptr;
    auto key = [](const EvalReport& r) { return std::pair(r.average_l3_l6.value_or(-1.0), r.binary_accuracy); };
    for (const auto& r : reports) {
        if (r.model == designated) continue;
        if (!best || key(r) > key(*best) || (key(r) == key(*best) && r.model < best->model)) best = &r;
    }
    if (!best) return std::nullopt;
    DeltaRow d{designated, best->model, {}};
    ReportRow a = report_row(*self), b = report_row(*best);
    // Differences of the displayed two-decimal percentages.
    for (std::size_t c = 0; c < kReportColumns; ++c)
        if (a[c] && b[c]) d.delta[c] = round_half_up(round_half_up(*a[c] * 100.0, 2) - round_half_up(*b[c] * 100.0, 2), 2);
    return d;
}

ReportTable build_report(const std::vector<PredictionRecord>& records, const std::string& designated) {
    std::map<std::string, std::vector<PredictionRecord>> by_model;
    for (const auto& r : records) by_model[r.model].push_back(r);
    if (by_model.empty()) throw ValidationError("no prediction records to score");
    ReportTable t;
    for (const auto& [model, recs] : by_model) t.reports.push_back(evaluate_model(model, recs));
    std::string chosen = designated;
    if (chosen.empty()) {
        const EvalReport* top = &t.reports.front();
        for (const auto& r : t.reports)
            if (std::pair(r.average_l3_l6.value_or(-1.0), r.binary_accuracy) >
                std::pair(top->average_l3_l6.value_or(-1.0), top->binary_accuracy))
                top = &r;
        chosen = top->model;
    }
    t.delta = delta_over_best_baseline(t.reports, chosen);
    return t;
}

std::string format_delta(std::optional<double> points) {
    if (!points) return "NA";
    double v = round_half_up(*points, 2);
    if (v == 0.0) v = 0.0;  // no "-0.00"
    return (v >= 0 ? "+" : "") + format_fixed(v, 2);
}

std::string format_percent(std::optional<double> fraction) {
    if (!fraction) return "NA";
    return format_fixed(round_half_up(*fraction * 100.0, 2), 2);
}

void write_report_csv(std::ostream& out, const ReportTable& table) {
    out << "model,records,binary_accuracy,status_accuracy";
    for (std::size_t k = 1; k <= kMaxIndexDepth; ++k) out << ",l" << k << "_accuracy,l" << k << "_denominator";
    out << ",average_l3_l6\n";
    auto raw = [](std::optional<double> v) {
        if (!v) return std::string();
        std::ostringstream os;
        os << std::setprecision(17) << *v;
        return os.str();
    };
    for (const auto& r : table.reports) {
        out << csv_escape(r.model) << ',' << r.records << ',' << raw(r.binary_accuracy) << ','
            << raw(r.status_accuracy);
        for (std::size_t k = 1; k <= kMaxIndexDepth; ++k) {
            const auto& l = r.levels.at(k);
            out << ',' << raw(l.accuracy) << ',' << l.denominator;
        }
        out << ',' << raw(r.average_l3_l6) << '\n';
    }
    if (table.delta) {
        const auto& d = *table.delta;
        // Delta row in percentage points, aligned to the table columns.
        out << csv_escape("delta:" + d.model + " vs " + d.best_baseline) << ",," << format_delta(d.delta[0]) << ",";
        for (std::size_t k = 1; k <= kMaxIndexDepth; ++k) {
            bool shown = k >= kReportFirstLevel && k <= kReportLastLevel;
            out << ',' << (shown ? format_delta(d.delta[k - kReportFirstLevel + 1]) : "") << ',';
        }
        out << ',' << format_delta(d.delta[kReportColumns - 1]) << '\n';
    }
}

void write_report_text(std::ostream& out, const ReportTable& table) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"Model"};
    for (const auto& n : report_column_names()) header.push_back(n);
    rows.push_back(header);
    for (const auto& r : table.reports) {
        std::vector<std::string> row{r.model};
        for (const auto& v : report_row(r)) row.push_back(format_percent(v));
        rows.push_back(row);
    }
    if (table.delta) {
        std::vector<std::string> row{"Delta over " + table.delta->best_baseline};
        for (const auto& v : table.delta->delta) row.push_back(format_delta(v));
        rows.push_back(row);
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0)
                out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
            else
                out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
        }
        out << '\n';
    }
}

}  // namespace ccm
