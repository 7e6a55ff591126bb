#include "ccm/prompts.hpp"

#include "ccm/event.hpp"

#include "json.hpp"

#include <sstream>

namespace ccm {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kRoleFraming =
    "You are a senior policy analyst. Your job is to extract structured information from IMF Annual Report on "
    "Exchange Arrangements and Exchange Restrictions (AREAER) reports. Examples of report entries follow. Each "
    "textual report lists the capital control policies of a country with detailed descriptions:\n";

constexpr const char* kTaskFraming =
    "You are a senior policy analyst. Your job is to extract structured information from IMF capital control "
    "descriptions.\n"
    "Return all results as a JSON object with specific fields. Use precise and short terms.\n"
    "If a field is not explicitly mentioned, return null or false.\n"
    "For each extracted field, also include a new field called '[field]_source_sentence' showing the exact "
    "sentence from the original description that supports your extraction.\n";

struct ActionDoc {
    Action action;
    const char* meaning;
    const char* example;
};

constexpr ActionDoc kActionDocs[] = {
    {Action::prohibit, "Explicitly bans a type of transaction or capital flow.",
     "Residents are prohibited from acquiring foreign bonds."},
    {Action::limit, "Imposes a cap or threshold on volume, frequency, or eligible entities.",
     "A ceiling was placed on foreign portfolio investment."},
    {Action::suspend, "Temporarily halts or freezes an activity that was previously allowed.",
     "Licensing of outward investments was suspended."},
    {Action::require_approval, "Allows the activity only if prior approval or registration is granted.",
     "All real estate purchases by nonresidents require prior approval."},
    {Action::subject_to_quota, "Allows the activity but restricts it under a quota or allocation.",
     "Foreign exchange purchases for education are subject to quota."},
    {Action::permit, "Explicitly authorizes or legalizes an activity that was previously restricted.",
     "Corporates are permitted to invest abroad in joint ventures."},
    {Action::remove, "Cancels a previous restriction or approval requirement.",
     "The requirement for prior approval was removed."},
    {Action::ease, "Makes an existing restriction more flexible (e.g., expanding coverage, simplifying approval).",
     "Approval procedures were eased for investment abroad."},
    {Action::amend, "Modifies the wording or scope of existing regulation without clearly changing its restrictiveness.",
     "The regulation was amended to update procedural definitions."},
    {Action::clarify, "Provides clarification or interpretation of existing rules without changing legal effect.",
     "The scope of 'resident' was clarified to include offshore subsidiaries."},
};

constexpr const char* kFieldGuide =
    "\nFor 'Action Intensity', classify only into the following categories based on meaning:\n"
    "- restrictive: Used when the policy limits or prohibits cross-border transactions. Common cues: prohibit, "
    "ban, restrict, suspend, limit, impose, freeze.\n"
    "  Example: \"Residents are no longer allowed to purchase foreign securities.\"\n"
    "- liberalizing: Used when the policy removes, relaxes, or eases controls. Cues: allow, remove, lift, permit, "
    "ease, liberalize.\n"
    "  Example: \"Restrictions on nonresidents purchasing local bonds were lifted.\"\n"
    "- conditional: Used when the policy allows actions only under specific conditions (approval, quota, limits).\n"
    "  Example: \"Foreign investment is allowed, subject to approval by the Ministry.\"\n"
    "- neutral: Used when the change is administrative or direction is unclear.\n"
    "  Example: \"The central bank clarified reporting procedures for offshore transactions.\"\n"
    "\nFor 'Action Direction', classify only as:\n"
    "- inward: Affects inflows into the country.\n"
    "- outward: Affects outflows from the country.\n"
    "- both: Simultaneously affects inward and outward flows.\n"
    "- undefined: Direction not specified or unclear.\n"
    "For 'Action Level', classify only as:\n"
    "- supranational: Decision made by a regional or international body (e.g., EU).\n"
    "- national: Implemented by central government.\n"
    "- subnational: Implemented by local or provincial authority.\n"
    "- undefined: Level of authority not specified.\n"
    "For 'Instrument', classify by the policy tool (e.g., foreign exchange, bank credit, bank reserve "
    "requirement).\n"
    "For 'Actor', classify by the policy maker (e.g., central bank, government, commercial banks).\n"
    "For 'Beneficiary', classify by the group of investors the policy aims at (e.g., exporters, travelers).\n"
    "For 'Condition', classify by additional requirement:\n"
    "- without (e.g., without approval)\n"
    "- with (e.g., only on request, subject to approval)\n"
    "  Put the requirement itself in 'condition_detail'.\n"
    "For 'Target Country', identify the country targeted by the policy.\n"
    "For 'Target Industry', identify the industry targeted by the policy.\n"
    "For 'Limit Threshold', give the number or threshold the policy sets, if any.\n"
    "For 'Retroactive Date', give the date on which the policy is canceled or applies retroactively, if any "
    "(YYYY-MM-DD).\n"
    "For 'Is Trade Policy', return true if the measure affects trade in goods or tariffs (e.g., includes words "
    "like import, export, quota, tariff).\n"
    "For 'Is Sanction', return true if the measure involves bans, freezes, or disallowing actions typically "
    "against countries or individuals.\n"
    "For 'Is National Security', return true if the justification or mechanism refers to security, terrorism, "
    "or national interest.\n"
    "For 'LLM Reasoning', give the cited phrases and a short rationale for the classification.\n";

std::string output_schema() {
    std::ostringstream os;
    os << "\nThe JSON object must use exactly these keys:\n";
    os << "- action: one of the 10 action values\n";
    os << "- action_intensity: restrictive | liberalizing | conditional | neutral\n";
    os << "- action_direction: inward | outward | both | undefined\n";
    os << "- action_level: supranational | national | subnational | undefined\n";
    os << "- instrument, actor, beneficiary, target_country, target_industry, limit_threshold: short text or null\n";
    os << "- condition: with | without | null; condition_detail: short text or null\n";
    os << "- retroactive_date: YYYY-MM-DD or null\n";
    os << "- is_trade_policy, is_sanction, is_national_security: true or false\n";
    os << "- llm_reasoning: {\"cited_phrases\": [text], \"rationale\": text}\n";
    os << "- <key>_source_sentence for every key above except llm_reasoning: the exact sentence, or null when the "
          "field is null or false\n";
    return os.str();
}

void write_categories(std::ostream& os, const Taxonomy& taxonomy) {
    os << "\nCapital control categories (index, name):\n";
    for (const auto& n : taxonomy.nodes()) {
        os << std::string(2 * (n.depth - 1), ' ') << n.index << ' ' << n.name;
        if (n.short_code) os << " [" << *n.short_code << ']';
        os << '\n';
    }
}

ordered_json exemplar_json(const ReportEntry& e) {
    ordered_json j;
    j["index"] = e.index + ".";
    j["category"] = e.category;
    j["code"] = e.code ? ordered_json(*e.code) : ordered_json(nullptr);
    j["status"] = std::string(to_string(e.status));
    j["description"] = e.description;
    return j;
}

}  // namespace

const std::vector<ReportEntry>& default_exemplars() {
    static const std::vector<ReportEntry> rows = {
        ReportEntry{
            1999, "Afghanistan", "X.D.2", "Inward direct investment", "172", Status::yes,
            "Investments require prior approval and are administered by the Investment Committee. The law "
            "stipulates that foreign investment in the Islamic State of Afghanistan can take place only through "
            "joint ventures, with foreign participation not exceeding 49 percent. An investment approved by the "
            "Investment Committee requires no further license in order to operate in the Islamic State of "
            "Afghanistan."},
    };
    return rows;
}

std::string build_system_prompt(const Taxonomy& taxonomy, std::span<const ReportEntry> exemplars) {
    std::ostringstream os;
    os << kRoleFraming << '\n';
    for (const auto& e : exemplars) os << exemplar_json(e).dump(-1, ' ', false, ordered_json::error_handler_t::replace) << '\n';
    os << '\n' << kTaskFraming;
    os << "\nFor 'Action', classify by the verb used to apply the policy.\n";
    os << "- \"Action\": Classify the policy's primary regulatory move into one of the following 10 fixed "
          "categories. Choose the most important action described in the text. If multiple actions are present, "
          "select the one with the greatest policy impact. Return only one of the following values:\n";
    for (const auto& d : kActionDocs)
        os << "    - " << to_string(d.action) << ": " << d.meaning << "\n      Example: \"" << d.example << "\"\n";
    os << kFieldGuide;
    write_categories(os, taxonomy);
    os << output_schema();
    return os.str();
}

std::string build_user_prompt(std::string_view country, std::string_view index, std::string_view category,
                              std::string_view description) {
    std::string out;
    out += "Country: ";
    out += country;
    out += "\nCategory index: ";
    out += index.empty() ? std::string_view("unknown") : index;
    out += "\nCategory: ";
    out += category;
    out += "\nDescription:\n";
    out += description;
    return out;
}

std::string build_correction_prompt(std::string_view violations) {
    std::string out =
        "Your previous answer did not follow the required schema. Fix these problems and return the complete JSON "
        "object again, with nothing else:\n";
    out += violations;
    return out;
}

std::string prompt_fingerprint(std::string_view prompt) { return hex64(fnv1a64(prompt)); }

}  // namespace ccm
