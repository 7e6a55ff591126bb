#pragma once

#include "ccm/corpus.hpp"
#include "ccm/event.hpp"
#include "ccm/taxonomy.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ccm {

/// An input text with its gold category and resulting status.
struct TrainingPair {
    std::string country;
    int year = 0;
    std::string input_text;
    std::string gold_index;  // canonical
    std::string gold_category;
    Status gold_status = Status::no;
    EntryKind pair_kind = EntryKind::final_report;
    bool is_capital_control = false;

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

/// One pair per final-report row.
std::vector<TrainingPair> build_final_report_pairs(const Corpus& corpus);

struct SkipRecord {
    std::string country;
    int year = 0;
    std::optional<std::string> index;
    std::string reason;

    friend bool operator==(const SkipRecord&, const SkipRecord&) = default;
};

inline constexpr std::string_view kSkipMissingNextReport = "missing year+1 report";
inline constexpr std::string_view kSkipCategoryAbsent = "category absent";
inline constexpr std::string_view kSkipNoIndex = "change has no category index";

struct ChangePairs {
    std::vector<TrainingPair> pairs;
    std::vector<SkipRecord> skips;
};

/// Pairs each year-y change with the status of the same country and index
/// in the year y+1 final report. Changes without a match are skipped.
ChangePairs build_change_pairs(const Corpus& corpus);

struct CategoryPath {
    std::vector<std::string> ancestors;  // "INDEX.Name", depth 1 downward
    std::string target_category;
};

/// Chat triple plus the metadata the distribution tables need.
struct TrainingExample {
    std::string system_message;
    std::string user_message;
    std::string assistant_message;  // JSON payload

    // Not serialized into the training file.
    std::string country;
    int year = 0;
    std::string gold_index;
    bool is_capital_control = false;
    std::size_t word_count = 0;
};

/// System message: task instructions plus the category tree with one-line
/// descriptions.
std::string build_classifier_system_message(const Taxonomy& taxonomy);

/// Throws ValidationError when a capital-control gold index is not in the
/// taxonomy. Non-capital-control pairs use the out-of-taxonomy variant.
TrainingExample to_chat_example(const TrainingPair& pair, const Taxonomy& taxonomy);

/// Same as above with a prebuilt system message (avoids re-rendering it).
TrainingExample to_chat_example(const TrainingPair& pair, const Taxonomy& taxonomy, const std::string& system_message);

/// Parsed assistant payload.
struct AssistantAnswer {
    CategoryPath path;
    std::string index;  // as written (trailing dot)
    std::string category;
    Status status = Status::no;
};

/// Throws ParseError on anything that is not a well-formed assistant payload.
AssistantAnswer parse_assistant_message(std::string_view text);

/// {"messages":[system,user,assistant]} on one line.
std::string to_jsonl(const TrainingExample& ex);
TrainingExample example_from_jsonl(std::string_view line);  // messages only; throws ParseError

std::string to_jsonl(const SkipRecord& s);

struct SplitSpec {
    std::size_t train_size = 0;
    std::size_t validation_size = 0;
    std::size_t test_size = 0;
    std::uint64_t seed = 0;
};

/// Parses "train,validation,test".
SplitSpec parse_split(std::string_view text, std::uint64_t seed);

struct SplitComposition {
    std::size_t capital_control = 0;
    std::size_t other = 0;
};

struct DatasetSplits {
    std::vector<TrainingExample> train;
    std::vector<TrainingExample> validation;
    std::vector<TrainingExample> test;
    SplitComposition test_composition;
};

/// Index permutation the split uses: Fisher-Yates over mt19937_64 with
/// rejection sampling, so it is identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Uniform random partition; each split keeps the input order of its
/// members. Throws ValidationError if the sizes do not sum to |examples|.
DatasetSplits split_dataset(const std::vector<TrainingExample>& examples, const SplitSpec& spec);

struct CategoryCount {
    std::size_t count = 0;
    double mean_word_count = 0.0;
};

struct DatasetDistribution {
    std::map<int, std::size_t> by_year;
    std::map<std::string, std::size_t> by_income_group;
    std::map<std::string, std::size_t> by_region;
    std::map<std::string, CategoryCount> by_category;  // capital-control index or the out-of-taxonomy label
    std::size_t capital_control = 0;
    std::size_t other = 0;
};

/// Counts by year, income group, region and category. Countries without
/// metadata count under "unknown".
DatasetDistribution dataset_distribution(const std::vector<TrainingExample>& examples,
                                         const std::map<std::string, CountryMeta>& metas);

}  // namespace ccm
