#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccm {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

/// Number of whitespace-delimited tokens.
std::size_t word_count(std::string_view s) noexcept;

/// Splits prose into sentences. Each returned view is a slice of `text`, so
/// every sentence is a verbatim substring of the input.
std::vector<std::string_view> split_sentences(std::string_view text);

std::uint64_t fnv1a64(std::string_view data) noexcept;
std::string hex64(std::uint64_t v);

/// Calendar date. Only valid Gregorian dates can be constructed through parse_date.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    friend auto operator<=>(const Date&, const Date&) = default;
};

bool is_valid_date(int year, int month, int day) noexcept;

/// Accepts MM/DD/YYYY and YYYY-MM-DD. Returns nullopt for anything else,
/// including out-of-range month or day.
std::optional<Date> parse_date(std::string_view raw);
std::string format_date(const Date& d);

/// Months as one integer (year * 12 + month - 1) so event-time offsets are exact.
using MonthIndex = int;

constexpr MonthIndex month_index(int year, int month) noexcept { return year * 12 + (month - 1); }
constexpr MonthIndex month_index(const Date& d) noexcept { return month_index(d.year, d.month); }

/// Parses "YYYY-MM".
std::optional<MonthIndex> parse_month(std::string_view raw);
std::string format_month(MonthIndex m);

// Minimal RFC 4180 CSV support: quoted fields, doubled quotes, embedded
// separators and newlines inside quotes.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// Line number on which the most recently returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

/// Fixed two-decimal rendering of a double ("%.2f"-style without locale).
std::string format_fixed(double v, int decimals);

}  // namespace ccm
