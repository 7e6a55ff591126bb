#pragma once

#include "ccm/corpus.hpp"
#include "ccm/taxonomy.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ccm {

/// A gold or predicted category label.
struct Label {
    enum class Kind { index, out_of_taxonomy, unparseable };
    Kind kind = Kind::unparseable;
    std::string index;  // canonical, only for Kind::index

    static Label parse(std::string_view raw);  // never throws
    bool is_capital_control() const noexcept;

    friend bool operator==(const Label&, const Label&) = default;
};

struct PredictionRecord {
    std::string id;
    std::string model;
    Label gold;
    Status gold_status = Status::no;
    Label predicted;
    std::optional<Status> predicted_status;  // nullopt = unparseable
};

/// Reads {id, model, predicted_index, predicted_status, gold_index,
/// gold_status} lines. Malformed gold fields or duplicate (model, id) throw
/// LoadError; bad predictions become unparseable labels.
std::vector<PredictionRecord> load_predictions(std::istream& in);

/// Throws ValidationError on an empty record set.
double binary_accuracy(const std::vector<PredictionRecord>& records);
double status_accuracy(const std::vector<PredictionRecord>& records);

struct LevelAccuracy {
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    std::optional<double> accuracy;  // nullopt when the denominator is 0
};

/// Strict top-down accuracy at level k (1..6) over gold capital-control records.
LevelAccuracy hierarchical_accuracy(const std::vector<PredictionRecord>& records, std::size_t k);

inline constexpr std::size_t kReportFirstLevel = 3;
inline constexpr std::size_t kReportLastLevel = 6;

struct EvalReport {
    std::string model;
    std::size_t records = 0;
    double binary_accuracy = 0.0;
    double status_accuracy = 0.0;
    std::map<std::size_t, LevelAccuracy> levels;  // 1..6
    std::optional<double> average_l3_l6;          // mean of the defined L3..L6 accuracies
};

EvalReport evaluate_model(const std::string& model, const std::vector<PredictionRecord>& records);

/// Table columns in display order: binary, L3..L6, average.
inline constexpr std::size_t kReportColumns = 6;
using ReportRow = std::array<std::optional<double>, kReportColumns>;
ReportRow report_row(const EvalReport& r);
const std::array<std::string, kReportColumns>& report_column_names();

struct DeltaRow {
    std::string model;          // designated model
    std::string best_baseline;  // the baseline it is compared against
    ReportRow delta;            // percentage points
};

/// Best baseline = the non-designated model with the highest average, ties
/// broken by binary accuracy, then name. Values in percentage points.
std::optional<DeltaRow> delta_over_best_baseline(const std::vector<EvalReport>& reports, const std::string& designated);

struct ReportTable {
    std::vector<EvalReport> reports;  // sorted by model name
    std::optional<DeltaRow> delta;    // omitted for a single model
};

/// Groups records by model. An empty designated name picks the model with the
/// highest average.
ReportTable build_report(const std::vector<PredictionRecord>& records, const std::string& designated = {});

/// Half-up rounding to `decimals` places on a percentage value.
double round_half_up(double value, int decimals);
/// "+5.11" / "-0.40" / "NA".
std::string format_delta(std::optional<double> points);
/// Fraction rendered as a percentage with two decimals, "NA" when undefined.
std::string format_percent(std::optional<double> fraction);

/// Raw fractions plus denominators, one row per model, delta row last.
void write_report_csv(std::ostream& out, const ReportTable& table);
/// Aligned text table with percentages.
void write_report_text(std::ostream& out, const ReportTable& table);

}  // namespace ccm
