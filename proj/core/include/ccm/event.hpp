#pragma once

#include "ccm/corpus.hpp"
#include "ccm/taxonomy.hpp"
#include "ccm/text.hpp"

#include "json.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccm {

enum class Action { prohibit, limit, suspend, require_approval, subject_to_quota, permit, remove, ease, amend, clarify };
enum class Intensity { restrictive, liberalizing, conditional, neutral };
enum class ActionLevel { supranational, national, subnational, undefined };
enum class ConditionPolarity { with, without };

inline constexpr std::array<Action, 10> kAllActions = {
    Action::prohibit, Action::limit,  Action::suspend, Action::require_approval, Action::subject_to_quota,
    Action::permit,   Action::remove, Action::ease,    Action::amend,            Action::clarify};

std::string_view to_string(Action a) noexcept;
std::string_view to_string(Intensity i) noexcept;
std::string_view to_string(ActionLevel l) noexcept;
std::string_view to_string(ConditionPolarity c) noexcept;
std::optional<Action> parse_action(std::string_view s) noexcept;
std::optional<Intensity> parse_intensity(std::string_view s) noexcept;
std::optional<ActionLevel> parse_action_level(std::string_view s) noexcept;
std::optional<ConditionPolarity> parse_condition(std::string_view s) noexcept;

struct Condition {
    ConditionPolarity polarity = ConditionPolarity::with;
    std::optional<std::string> detail;

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct LlmReasoning {
    std::vector<std::string> cited_phrases;
    std::string rationale;

    friend bool operator==(const LlmReasoning&, const LlmReasoning&) = default;
};

enum class EntryKind { final_report, yearly_change };
std::string_view to_string(EntryKind k) noexcept;

/// One capital-control intervention: the 27 dataset fields plus provenance.
struct CcmEvent {
    std::string id;
    EntryKind source = EntryKind::yearly_change;

    // Identification and metadata.
    int year = 0;
    std::optional<std::string> ifs_code;
    std::string country;
    std::optional<std::string> region;
    std::optional<std::string> income_group;
    std::optional<std::string> income_subgroup;
    std::optional<std::string> index_code;
    std::optional<std::string> category_index;
    std::string category;
    std::optional<Date> date;
    std::string description;

    // Extracted by the model.
    std::optional<Date> retroactive_date;
    Action action = Action::clarify;
    Intensity action_intensity = Intensity::neutral;
    FlowDirection action_direction = FlowDirection::undefined;
    ActionLevel action_level = ActionLevel::undefined;
    std::optional<std::string> instrument;
    std::optional<std::string> actor;
    std::optional<Condition> condition;
    std::optional<std::string> beneficiary;
    std::optional<std::string> target_country;
    std::optional<std::string> target_industry;
    std::optional<std::string> limit_threshold;
    bool is_trade_policy = false;
    bool is_sanction = false;
    bool is_national_security = false;
    std::optional<LlmReasoning> llm_reasoning;

    /// Extracted field name -> verbatim supporting sentence from description.
    std::map<std::string, std::string> source_sentences;

    /// Set when no country metadata was available for this event.
    bool metadata_missing = false;

    friend bool operator==(const CcmEvent&, const CcmEvent&) = default;
};

/// The 27 annotated dataset fields, in dataset order.
const std::vector<std::string>& event_field_names();

/// Fields the model fills in; each populated one needs a
/// "<field>_source_sentence" in the payload (llm_reasoning excepted).
const std::vector<std::string>& extracted_field_names();

struct Violation {
    std::string field;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks a model payload against the event schema. Empty result iff every
/// enum is in vocabulary, every field has the right type, and every
/// populated field cites a sentence that occurs verbatim in `description`.
std::vector<Violation> validate_event(const nlohmann::json& candidate, std::string_view description);

/// Copies the model-extracted fields of a payload that passed validate_event.
void apply_payload(const nlohmann::json& payload, CcmEvent& event);

/// Inverse of apply_payload: the payload an event was built from.
nlohmann::json event_payload(const CcmEvent& event);

/// Output record with keys in alphabetical order; absent values are null.
nlohmann::json event_to_json(const CcmEvent& event);
CcmEvent event_from_json(const nlohmann::json& j);  // throws ValidationError

std::string format_violations(const std::vector<Violation>& v);

}  // namespace ccm
