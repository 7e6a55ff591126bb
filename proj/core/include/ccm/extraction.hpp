#pragma once

#include "ccm/chat_client.hpp"
#include "ccm/corpus.hpp"
#include "ccm/event.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ccm {

struct ExtractionConfig {
    std::string model = "gpt-4.1";
    double temperature = 0.0;
    int max_parallel = 4;
    int retry_budget = 1;
    std::string endpoint;
    double requests_per_minute = 0.0;

    /// Throws ValidationError unless temperature is 0 and max_parallel >= 1.
    void validate() const;
};

using PolicyEntry = std::variant<ReportEntry, ChangeEntry>;

EntryKind kind_of(const PolicyEntry& e) noexcept;
const std::string& description_of(const PolicyEntry& e) noexcept;
const std::string& country_of(const PolicyEntry& e) noexcept;

/// Stable id derived from the entry's identifying fields and text.
std::string entry_id(const PolicyEntry& e);

/// Prompt material shared by every request of a batch.
struct PromptSet {
    std::string system_prompt;

    static PromptSet standard();  // built-in taxonomy and exemplars
};

class ExtractionFailure : public Error {
public:
    enum class Kind { transport, validation };

    ExtractionFailure(Kind kind, int attempts, std::string raw_payload, const std::string& what)
        : Error(what), kind_(kind), attempts_(attempts), raw_(std::move(raw_payload)) {}

    Kind kind() const noexcept { return kind_; }
    int attempts() const noexcept { return attempts_; }
    const std::string& raw_payload() const noexcept { return raw_; }

private:
    Kind kind_;
    int attempts_;
    std::string raw_;
};

/// Asks the backend for one entry and returns the validated event. Invalid
/// replies are re-asked with the violation list appended, and failed
/// transports retried, up to config.retry_budget extra attempts.
/// `meta` may be null; the event is then flagged metadata_missing.
CcmEvent extract_event(const PolicyEntry& entry, const CountryMeta* meta, const ExtractionConfig& config,
                       ChatClient& client, const PromptSet& prompts = PromptSet::standard());

struct FailureRecord {
    std::string id;
    std::size_t position = 0;  // index in the batch input
    std::string kind;          // "transport" or "validation"
    int attempts = 0;
    std::string message;
    std::string raw_payload;
};

std::string to_jsonl(const FailureRecord& f);

struct BatchResult {
    std::vector<CcmEvent> events;  // input order
    std::vector<FailureRecord> failures;
};

/// Called in input order as soon as every earlier item has finished;
/// exactly one of the two pointers is non-null.
using BatchSink = std::function<void(std::size_t position, const CcmEvent*, const FailureRecord*)>;

/// Runs extract_event over the entries with up to config.max_parallel
/// requests in flight. Every entry ends up in events or failures.
BatchResult run_batch(const std::vector<PolicyEntry>& entries, const std::map<std::string, CountryMeta>& metas,
                      const ExtractionConfig& config, ChatClient& client, const BatchSink& sink = {},
                      const PromptSet& prompts = PromptSet::standard());

/// Pulls the first JSON object out of a model reply, tolerating code fences
/// and surrounding prose. Returns nullopt when there is none.
std::optional<nlohmann::json> parse_model_reply(std::string_view reply);

}  // namespace ccm
