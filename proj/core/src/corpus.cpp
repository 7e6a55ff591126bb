#include "ccm/corpus.hpp"

#include "ccm/error.hpp"
#include "ccm/taxonomy.hpp"

#include "json.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace ccm {

using json = nlohmann::json;

namespace {

// Reviewed mapping of AREAER country spellings to one canonical name.
const std::vector<std::pair<std::string, std::string>> kCountryMap = {
    {"Türkiye", "Turkey"},
    {"Hong Kong SAR", "Hong Kong"},
    {"Hong Kong Special Administrative Region", "Hong Kong"},
    {"Democratic Republic of the Congo (DRC)", "Democratic Republic of the Congo"},
    {"Democratic Republic of the Congo", "Democratic Republic of the Congo"},
    {"Republic of Korea", "South Korea"},
    {"Korea", "South Korea"},
    {"Islamic Republic of Iran", "Iran"},
    {"Republic of Yemen", "Yemen"},
    {"Syrian Arab Republic", "Syria"},
    {"Lao P.D.R.", "Laos"},
    {"Lao People’s Democratic Republic", "Laos"},
    {"People’s Republic of China", "China"},
    {"People’s Republic of China—Hong Kong SAR", "Hong Kong"},
    {"Swaziland", "Eswatini"},
    {"Kingdom of Eswatini", "Eswatini"},
    {"Cape Verde", "Cabo Verde"},
    {"República Bolivariana de Venezuela", "Venezuela"},
    {"República Bolivariana De Venezuela", "Venezuela"},
    {"Russian Federation", "Russia"},
    {"Papua New-Guinea", "Papua New Guinea"},
    {"Federated States of Micronesia", "Micronesia"},
    {"Serbia and Montenegro", "Serbia"},
    {"Republic of Serbia", "Serbia"},
    {"Republic of Montenegro", "Montenegro"},
    {"Islamic Republic of Afghanistan", "Afghanistan"},
    {"Islamic State of Afghanistan", "Afghanistan"},
    {"Czech Republic", "Czechia"},
    {"Former Yugoslav Republic of Macedonia", "North Macedonia"},
    {"Republic of North Macedonia", "North Macedonia"},
    {"Republic of Congo (Congo)", "Republic of Congo"},
    {"Democratic Republic of Timor-Leste", "Timor-Leste"},
    {"Republic of Azerbaijan", "Azerbaijan"},
    {"Republic of Fiji", "Fiji"},
    {"Socialist People’s Libyan Arab Jamahiriya", "Libya"},
};

const std::unordered_map<std::string_view, std::string_view>& country_index() {
    static const auto idx = [] {
        std::unordered_map<std::string_view, std::string_view> m;
        for (const auto& [from, to] : kCountryMap) m.emplace(from, to);
        return m;
    }();
    return idx;
}

// A source row with every value as optional text, whatever the input format.
struct RawRow {
    std::size_t line = 0;
    std::string raw;
    std::map<std::string, std::optional<std::string>, std::less<>> fields;
    std::optional<std::string> error;  // row-level parse failure

    std::optional<std::string> get(std::string_view key) const {
        auto it = fields.find(key);
        if (it == fields.end() || !it->second) return std::nullopt;
        std::string_view v = trim(*it->second);
        if (v.empty()) return std::nullopt;
        return std::string(v);
    }
};

template <class Fn>
void read_jsonl_rows(std::istream& in, Fn&& on_row) {
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        RawRow row;
        row.line = n;
        row.raw = line;
        try {
            json j = json::parse(line);
            if (!j.is_object()) {
                row.error = "row is not a JSON object";
            } else {
                for (auto it = j.begin(); it != j.end(); ++it) {
                    const std::string& k = it.key();
                    const json& v = it.value();
                    if (v.is_null()) {
                        row.fields[k] = std::nullopt;
                    } else if (v.is_string()) {
                        row.fields[k] = v.get<std::string>();
                    } else if (v.is_number_integer()) {
                        row.fields[k] = std::to_string(v.get<long long>());
                    } else {
                        row.error = "field '" + k + "' has unsupported type " + v.type_name();
                        break;
                    }
                }
            }
        } catch (const json::parse_error& e) {
            row.error = std::string("malformed JSON: ") + e.what();
        }
        on_row(row);
    }
    if (in.bad()) throw IoError("read failure after line " + std::to_string(n));
}

template <class Fn>
void read_csv_rows(std::istream& in, Fn&& on_row) {
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) return;
    for (auto& h : header) h = std::string(trim(h));
    std::vector<std::string> cells;
    while (reader.next(cells)) {
        if (cells.size() == 1 && trim(cells[0]).empty()) continue;
        RawRow row;
        row.line = reader.line();
        row.raw = csv_row(cells);
        if (cells.size() != header.size()) {
            row.error = "expected " + std::to_string(header.size()) + " columns, found " + std::to_string(cells.size());
        } else {
            for (std::size_t i = 0; i < header.size(); ++i) row.fields[header[i]] = cells[i];
        }
        on_row(row);
    }
    if (in.bad()) throw IoError("read failure after line " + std::to_string(reader.line()));
}

template <class Fn>
void read_rows(std::istream& in, SourceFormat format, Fn&& on_row) {
    if (!in) throw IoError("source stream is not readable");
    if (format == SourceFormat::csv)
        read_csv_rows(in, on_row);
    else
        read_jsonl_rows(in, on_row);
}

// Shared column handling; returns a reject reason or empty on success.
std::string read_common(const RawRow& row, std::optional<int> year, int& out_year, std::string& out_country,
                        std::string& out_description) {
    if (row.error) return *row.error;
    if (auto y = row.get("year")) {
        try {
            std::size_t pos = 0;
            int v = std::stoi(*y, &pos);
            if (pos != y->size()) return "year '" + *y + "' is not an integer";
            if (year && v != *year)
                return "year " + *y + " does not match source year " + std::to_string(*year);
            out_year = v;
        } catch (const std::exception&) {
            return "year '" + *y + "' is not an integer";
        }
    } else if (year) {
        out_year = *year;
    } else {
        return "missing year";
    }
    auto country = row.get("country");
    if (!country) return "missing country";
    out_country = normalize_country(*country);
    auto desc = row.get("description");
    if (!desc) return "missing description";
    out_description = *desc;
    return {};
}

}  // namespace

std::string_view to_string(Status s) noexcept { return s == Status::yes ? "yes" : "no"; }

std::optional<Status> parse_status(std::string_view s) {
    std::string l = to_lower(trim(s));
    if (l == "yes") return Status::yes;
    if (l == "no") return Status::no;
    return std::nullopt;
}

SourceFormat format_for_path(std::string_view path) {
    std::string l = to_lower(path);
    return l.size() >= 4 && l.compare(l.size() - 4, 4, ".csv") == 0 ? SourceFormat::csv : SourceFormat::jsonl;
}

std::string normalize_country(std::string_view raw) {
    const auto& idx = country_index();
    auto it = idx.find(trim(raw));
    return it == idx.end() ? std::string(raw) : std::string(it->second);
}

const std::vector<std::pair<std::string, std::string>>& country_mappings() { return kCountryMap; }

IngestResult<ReportEntry> ingest_final_report(std::istream& source, std::optional<int> year, SourceFormat format) {
    IngestResult<ReportEntry> result;
    read_rows(source, format, [&](const RawRow& row) {
        ReportEntry e;
        std::string reason = read_common(row, year, e.year, e.country, e.description);
        if (reason.empty()) {
            auto index = row.get("index");
            auto status = row.get("status");
            if (!index) {
                reason = "missing index";
            } else if (!status) {
                reason = "missing status";
            } else if (auto s = parse_status(*status); !s) {
                reason = "unknown status '" + *status + "'";
            } else {
                e.status = *s;
                try {
                    e.index = normalize_index(*index);
                } catch (const ParseError& err) {
                    reason = err.what();
                }
            }
            e.category = row.get("category").value_or("");
            e.code = row.get("code");
        }
        if (reason.empty())
            result.entries.push_back(std::move(e));
        else
            result.rejects.push_back({row.line, std::move(reason), row.raw});
    });
    return result;
}

IngestResult<ChangeEntry> ingest_yearly_changes(std::istream& source, std::optional<int> year, SourceFormat format) {
    IngestResult<ChangeEntry> result;
    read_rows(source, format, [&](const RawRow& row) {
        ChangeEntry e;
        std::string reason = read_common(row, year, e.year, e.country, e.description);
        if (reason.empty()) {
            if (auto index = row.get("index")) {
                try {
                    e.index = normalize_index(*index);
                } catch (const ParseError& err) {
                    reason = err.what();
                }
            }
            e.category = row.get("category").value_or("");
            if (auto date = row.get("effective_date"); date && reason.empty()) {
                auto d = parse_date(*date);
                if (!d)
                    reason = "unparseable effective_date '" + *date + "'";
                else if (d->year < e.year - 1 || d->year > e.year + 1)
                    reason = "effective_date " + *date + " outside report year " + std::to_string(e.year) + " +/- 1";
                else
                    e.effective_date = d;
            }
        }
        if (reason.empty())
            result.entries.push_back(std::move(e));
        else
            result.rejects.push_back({row.line, std::move(reason), row.raw});
    });
    return result;
}

std::map<std::string, CountryMeta> load_country_meta(std::istream& source) {
    if (!source) throw IoError("country metadata stream is not readable");
    CsvReader reader(source);
    std::vector<std::string> header;
    if (!reader.next(header)) throw LoadError(1, "country metadata file is empty");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[std::string(trim(header[i]))] = i;
    for (const char* need : {"country", "ifs_code", "region", "income_group", "income_subgroup"})
        if (!col.count(need)) throw LoadError(1, std::string("missing column ") + need);

    std::map<std::string, CountryMeta> out;
    std::vector<std::string> cells;
    while (reader.next(cells)) {
        if (cells.size() == 1 && trim(cells[0]).empty()) continue;
        if (cells.size() != header.size()) throw LoadError(reader.line(), "column count mismatch");
        auto cell = [&](const char* k) { return std::string(trim(cells[col.at(k)])); };
        CountryMeta m{normalize_country(cell("country")), cell("ifs_code"), cell("region"), cell("income_group"),
                      cell("income_subgroup")};
        if (m.country.empty()) throw LoadError(reader.line(), "empty country");
        std::string name = m.country;
        if (!out.emplace(name, std::move(m)).second)
            throw LoadError(reader.line(), "duplicate country " + name);
    }
    return out;
}

const CorpusBucket* Corpus::bucket(std::string_view country, int year) const {
    auto it = std::lower_bound(buckets_.begin(), buckets_.end(), std::pair(country, year),
                               [](const CorpusBucket& b, const auto& key) {
                                   return std::tie(b.country, b.year) < std::tie(key.first, key.second);
                               });
    if (it == buckets_.end() || it->country != country || it->year != year) return nullptr;
    return &*it;
}

const ReportEntry* Corpus::report(std::string_view country, int year, std::string_view index) const {
    std::string key;
    try {
        key = normalize_index(index);
    } catch (const ParseError&) {
        return nullptr;
    }
    auto it = report_pos_.find(std::make_tuple(std::string(country), year, key));
    if (it == report_pos_.end()) return nullptr;
    return &buckets_[it->second.first].reports[it->second.second];
}

std::size_t Corpus::report_count() const noexcept {
    std::size_t n = 0;
    for (const auto& b : buckets_) n += b.reports.size();
    return n;
}

std::size_t Corpus::change_count() const noexcept {
    std::size_t n = 0;
    for (const auto& b : buckets_) n += b.changes.size();
    return n;
}

Corpus merge_corpus(std::vector<ReportEntry> reports, std::vector<ChangeEntry> changes) {
    Corpus corpus;
    std::map<std::pair<std::string, int>, CorpusBucket> grouped;
    auto bucket_for = [&](const std::string& country, int year) -> CorpusBucket& {
        auto [it, inserted] = grouped.try_emplace({country, year});
        if (inserted) {
            it->second.country = country;
            it->second.year = year;
        }
        return it->second;
    };

    // Last occurrence of a duplicate (country, year, index) wins.
    std::map<std::tuple<std::string, int, std::string>, std::size_t> last;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        auto key = std::make_tuple(reports[i].country, reports[i].year, reports[i].index);
        auto [it, inserted] = last.try_emplace(key, i);
        if (!inserted) {
            corpus.warnings_.push_back("duplicate final-report row for " + reports[i].country + " " +
                                       std::to_string(reports[i].year) + " " + reports[i].index +
                                       "; keeping the last occurrence");
            it->second = i;
        }
    }
    for (auto& [key, i] : last) bucket_for(reports[i].country, reports[i].year).reports.push_back(std::move(reports[i]));
    for (auto& c : changes) bucket_for(c.country, c.year).changes.push_back(std::move(c));

    for (auto& [key, b] : grouped) {
        std::sort(b.reports.begin(), b.reports.end(),
                  [](const ReportEntry& a, const ReportEntry& c) { return a.index < c.index; });
        std::sort(b.changes.begin(), b.changes.end(), [](const ChangeEntry& a, const ChangeEntry& c) {
            return std::tie(a.index, a.effective_date, a.description, a.category) <
                   std::tie(c.index, c.effective_date, c.description, c.category);
        });
        corpus.buckets_.push_back(std::move(b));
    }
    for (std::size_t bi = 0; bi < corpus.buckets_.size(); ++bi) {
        const auto& b = corpus.buckets_[bi];
        for (std::size_t ri = 0; ri < b.reports.size(); ++ri)
            corpus.report_pos_.emplace(std::make_tuple(b.country, b.year, b.reports[ri].index), std::pair(bi, ri));
    }
    return corpus;
}

std::vector<YearStats> corpus_stats(const Corpus& corpus) {
    std::map<int, YearStats> by_year;
    for (const auto& b : corpus.buckets()) {
        auto& s = by_year[b.year];
        s.year = b.year;
        for (const auto& r : b.reports) {
            s.report_count = s.report_count.value_or(0) + 1;
            s.report_words = s.report_words.value_or(0) + word_count(r.description);
        }
        for (const auto& c : b.changes) {
            s.change_count = s.change_count.value_or(0) + 1;
            s.change_words = s.change_words.value_or(0) + word_count(c.description);
        }
    }
    std::vector<YearStats> out;
    for (auto& [y, s] : by_year) out.push_back(s);
    return out;
}

void write_stats_csv(std::ostream& out, const std::vector<YearStats>& stats) {
    auto cell = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); };
    out << "year,report_count,report_word_count,change_count,change_word_count\n";
    for (const auto& s : stats)
        out << s.year << ',' << cell(s.report_count) << ',' << cell(s.report_words) << ',' << cell(s.change_count)
            << ',' << cell(s.change_words) << '\n';
}

std::string to_jsonl(const ReportEntry& e) {
    json j;
    j["year"] = e.year;
    j["country"] = e.country;
    j["index"] = e.index;
    j["category"] = e.category;
    j["code"] = e.code ? json(*e.code) : json(nullptr);
    j["status"] = std::string(to_string(e.status));
    j["description"] = e.description;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_jsonl(const ChangeEntry& e) {
    json j;
    j["year"] = e.year;
    j["country"] = e.country;
    j["index"] = e.index ? json(*e.index) : json(nullptr);
    j["category"] = e.category;
    j["effective_date"] = e.effective_date ? json(format_date(*e.effective_date)) : json(nullptr);
    j["description"] = e.description;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_jsonl(const Reject& r) {
    json j;
    j["row"] = r.row;
    j["reason"] = r.reason;
    j["raw"] = r.raw;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace ccm
