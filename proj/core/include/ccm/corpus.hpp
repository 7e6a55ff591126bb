#pragma once

#include "ccm/text.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace ccm {

enum class Status { yes, no };

std::string_view to_string(Status s) noexcept;
/// Case-insensitive "yes"/"no".
std::optional<Status> parse_status(std::string_view s);

enum class SourceFormat { jsonl, csv };

/// Picks csv for a ".csv" extension, jsonl otherwise.
SourceFormat format_for_path(std::string_view path);

/// One category row of an annual final report.
struct ReportEntry {
    int year = 0;
    std::string country;
    std::string index;  // canonical (trailing dots stripped)
    std::string category;
    std::optional<std::string> code;
    Status status = Status::no;
    std::string description;

    friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

/// One dated policy change from the yearly-changes log.
struct ChangeEntry {
    int year = 0;
    std::string country;
    std::optional<std::string> index;
    std::string category;
    std::optional<Date> effective_date;
    std::string description;

    friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

struct CountryMeta {
    std::string country;
    std::string ifs_code;
    std::string region;
    std::string income_group;
    std::string income_subgroup;
};

/// Canonical country name per the reviewed mapping table; unmapped names are
/// returned unchanged.
std::string normalize_country(std::string_view raw);

/// The (original, standardized) pairs of the country mapping table.
const std::vector<std::pair<std::string, std::string>>& country_mappings();

struct Reject {
    std::size_t row = 0;  // 1-based line number in the source
    std::string reason;
    std::string raw;
};

template <class Entry>
struct IngestResult {
    std::vector<Entry> entries;
    std::vector<Reject> rejects;
};

/// Reads final-report rows (fields: year, country, index, category, code,
/// status, description). A row without a year takes `year`; a row whose year
/// disagrees with a given `year` is rejected. Malformed rows become rejects.
/// Throws IoError if the stream fails mid-read.
IngestResult<ReportEntry> ingest_final_report(std::istream& source, std::optional<int> year,
                                              SourceFormat format = SourceFormat::jsonl);

/// Reads yearly-change rows (fields: year, country, index, category,
/// effective_date, description). Dates are MM/DD/YYYY or YYYY-MM-DD and must
/// fall in the row's year or an adjacent one.
IngestResult<ChangeEntry> ingest_yearly_changes(std::istream& source, std::optional<int> year,
                                                SourceFormat format = SourceFormat::jsonl);

/// Country metadata CSV (country, ifs_code, region, income_group,
/// income_subgroup). Country names are normalized; duplicates throw LoadError.
std::map<std::string, CountryMeta> load_country_meta(std::istream& source);

struct CorpusBucket {
    std::string country;
    int year = 0;
    std::vector<ReportEntry> reports;  // ordered by index
    std::vector<ChangeEntry> changes;  // ordered by index, date, text
};

/// Report and change rows grouped by (country, year). Immutable once built.
class Corpus {
public:
    const std::vector<CorpusBucket>& buckets() const noexcept { return buckets_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    const CorpusBucket* bucket(std::string_view country, int year) const;

    /// Final-report row for (country, year, index); index in any spelling.
    const ReportEntry* report(std::string_view country, int year, std::string_view index) const;

    std::size_t report_count() const noexcept;
    std::size_t change_count() const noexcept;

private:
    friend Corpus merge_corpus(std::vector<ReportEntry>, std::vector<ChangeEntry>);

    std::vector<CorpusBucket> buckets_;
    std::map<std::tuple<std::string, int, std::string>, std::pair<std::size_t, std::size_t>, std::less<>> report_pos_;
    std::vector<std::string> warnings_;
};

/// Groups rows by (country, year) in deterministic order. Duplicate
/// (country, year, index) report rows keep the last occurrence and leave a
/// warning.
Corpus merge_corpus(std::vector<ReportEntry> reports, std::vector<ChangeEntry> changes);

/// Per-year counts and whitespace word totals. A column is empty (nullopt)
/// for years without any row of that kind.
struct YearStats {
    int year = 0;
    std::optional<std::size_t> report_count;
    std::optional<std::size_t> report_words;
    std::optional<std::size_t> change_count;
    std::optional<std::size_t> change_words;

    friend bool operator==(const YearStats&, const YearStats&) = default;
};

std::vector<YearStats> corpus_stats(const Corpus& corpus);

void write_stats_csv(std::ostream& out, const std::vector<YearStats>& stats);

// JSONL serialization used by the corpus store and the rejects report.
std::string to_jsonl(const ReportEntry& e);
std::string to_jsonl(const ChangeEntry& e);
std::string to_jsonl(const Reject& r);

}  // namespace ccm
