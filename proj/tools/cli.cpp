#include "cli.hpp"

#include "ccm/corpus.hpp"
#include "ccm/error.hpp"
#include "ccm/event.hpp"
#include "ccm/evaluation.hpp"
#include "ccm/eventstudy.hpp"
#include "ccm/extraction.hpp"
#include "ccm/finetune.hpp"
#include "ccm/stats.hpp"
#include "ccm/taxonomy.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace ccm::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

EnvLookup process_environment() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
}

namespace {

constexpr const char* kEnvApiKey = "CCM_API_KEY";
constexpr const char* kEnvApiBase = "CCM_API_BASE";

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ValidationError(std::string(what) + " path is empty");
    if (!fs::is_regular_file(path)) throw ValidationError(std::string(what) + " not found: " + path);
}

void require_dir(const std::string& path, const char* what) {
    if (!fs::is_directory(path)) throw ValidationError(std::string(what) + " directory not found: " + path);
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, bool append = false) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
    out.close();
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
    auto out = open_out(path);
    fn(out);
    close_checked(out, path);
}

void write_run_config(const fs::path& dir, const ordered_json& config) {
    write_file(dir / "run_config.json", [&](std::ostream& o) {
        o << config.dump(2, ' ', false, ordered_json::error_handler_t::replace) << '\n';
    });
}

ordered_json config_header(const std::string& command) {
    ordered_json j;
    j["command"] = command;
    j["version"] = CCM_VERSION;
    return j;
}

// Prefixes loader errors with the file they came from, keeping the type.
template <class Fn>
auto with_path(const fs::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const LoadError& e) {
        throw LoadError(e.line(), path.string() + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::optional<int> year_from_stem(const fs::path& p) {
    std::string stem = p.stem().string();
    if (stem.size() == 4 && stem.find_first_not_of("0123456789") == std::string::npos) return std::stoi(stem);
    return std::nullopt;
}

std::vector<fs::path> data_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& e : fs::directory_iterator(dir)) {
        auto ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".jsonl" || ext == ".csv")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::map<std::string, CountryMeta> read_meta(const std::string& path) {
    require_file(path, "country metadata");
    auto in = open_in(path);
    return with_path(path, [&] { return load_country_meta(in); });
}

// Corpus store written by `ingest`.
struct Store {
    fs::path reports;
    fs::path changes;
    fs::path meta;

    explicit Store(const fs::path& root)
        : reports(root / "corpus" / "final_reports.jsonl"),
          changes(root / "corpus" / "yearly_changes.jsonl"),
          meta(root / "corpus" / "country_meta.csv") {}

    Corpus load() const {
        require_file(reports.string(), "corpus store final reports");
        require_file(changes.string(), "corpus store yearly changes");
        auto rin = open_in(reports);
        auto r = ingest_final_report(rin, std::nullopt);
        auto cin = open_in(changes);
        auto c = ingest_yearly_changes(cin, std::nullopt);
        if (!r.rejects.empty())
            throw LoadError(r.rejects.front().row, reports.string() + ": " + r.rejects.front().reason);
        if (!c.rejects.empty())
            throw LoadError(c.rejects.front().row, changes.string() + ": " + c.rejects.front().reason);
        return merge_corpus(std::move(r.entries), std::move(c.entries));
    }
};

std::vector<CcmEvent> read_events(const std::string& path) {
    require_file(path, "events file");
    auto in = open_in(path);
    std::vector<CcmEvent> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw LoadError(lineno, path + ": malformed JSON");
        try {
            events.push_back(event_from_json(j));
        } catch (const ValidationError& e) {
            throw LoadError(lineno, path + ": " + e.what());
        }
    }
    if (in.bad()) throw IoError("read error in " + path);
    return events;
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

// ---------------------------------------------------------------- ingest

struct IngestArgs {
    std::string corpus;
    std::string out;
    std::string metadata;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
    require_dir(a.corpus, "corpus");
    const fs::path root(a.corpus);
    const std::string meta_path = a.metadata.empty() ? (root / "country_meta.csv").string() : a.metadata;
    auto metas = read_meta(meta_path);

    const fs::path dest(a.out);
    std::vector<ReportEntry> reports;
    std::vector<ChangeEntry> changes;
    auto rejects = open_out(dest / "rejects.jsonl");
    std::size_t n_rejects = 0;
    auto log_rejects = [&](const fs::path& file, const std::vector<Reject>& rs) {
        for (const auto& r : rs) {
            json j = json::parse(to_jsonl(r));
            j["file"] = fs::relative(file, root).generic_string();
            rejects << dump_line(j) << '\n';
            ++n_rejects;
        }
    };
    auto report_files = data_files(root / "final_reports");
    auto change_files = data_files(root / "yearly_changes");
    if (report_files.empty() && change_files.empty())
        throw ValidationError("corpus directory " + a.corpus + " has no final_reports/ or yearly_changes/ data files");
    for (const auto& f : report_files) {
        auto in = open_in(f);
        auto res = with_path(f, [&] { return ingest_final_report(in, year_from_stem(f), format_for_path(f.string())); });
        log_rejects(f, res.rejects);
        std::move(res.entries.begin(), res.entries.end(), std::back_inserter(reports));
    }
    for (const auto& f : change_files) {
        auto in = open_in(f);
        auto res =
            with_path(f, [&] { return ingest_yearly_changes(in, year_from_stem(f), format_for_path(f.string())); });
        log_rejects(f, res.rejects);
        std::move(res.entries.begin(), res.entries.end(), std::back_inserter(changes));
    }
    close_checked(rejects, dest / "rejects.jsonl");

    Corpus corpus = merge_corpus(std::move(reports), std::move(changes));
    for (const auto& w : corpus.warnings()) err << "warning: " << w << '\n';
    std::set<std::string> unknown;
    for (const auto& b : corpus.buckets())
        if (!metas.count(b.country)) unknown.insert(b.country);
    for (const auto& c : unknown) err << "warning: no country metadata for " << c << '\n';

    Store store(dest);
    write_file(store.reports, [&](std::ostream& o) {
        for (const auto& b : corpus.buckets())
            for (const auto& r : b.reports) o << to_jsonl(r) << '\n';
    });
    write_file(store.changes, [&](std::ostream& o) {
        for (const auto& b : corpus.buckets())
            for (const auto& c : b.changes) o << to_jsonl(c) << '\n';
    });
    write_file(store.meta, [&](std::ostream& o) {
        o << "country,ifs_code,region,income_group,income_subgroup\n";
        for (const auto& [name, m] : metas)
            o << csv_row({m.country, m.ifs_code, m.region, m.income_group, m.income_subgroup}) << '\n';
    });
    write_file(dest / "corpus_stats.csv", [&](std::ostream& o) { write_stats_csv(o, corpus_stats(corpus)); });

    auto cfg = config_header("ingest");
    cfg["corpus"] = a.corpus;
    cfg["metadata"] = meta_path;
    cfg["out"] = a.out;
    cfg["report_rows"] = corpus.report_count();
    cfg["change_rows"] = corpus.change_count();
    cfg["rejects"] = n_rejects;
    write_run_config(dest, cfg);
    out << "ingested " << corpus.report_count() << " final-report rows and " << corpus.change_count()
        << " change rows (" << n_rejects << " rejected)\n";
    return kExitOk;
}

// --------------------------------------------------------------- extract

struct ExtractArgs {
    std::string corpus;
    std::string out;
    std::string metadata;
    bool mock = false;
    bool resume = false;
    std::string source = "changes";
    bool capital_only = false;
    std::string model = "gpt-4.1";
    int max_parallel = 4;
    int retry_budget = 1;
    double rpm = 0.0;
    std::string api_base;
    int timeout = 120;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    ExtractionConfig config;
    config.model = a.model;
    config.max_parallel = a.max_parallel;
    config.retry_budget = a.retry_budget;
    config.requests_per_minute = a.rpm;
    config.validate();

    std::unique_ptr<ChatClient> client;
    std::string endpoint = "mock";
    if (a.mock) {
        client = std::make_unique<MockChatClient>();
    } else {
        auto key = env(kEnvApiKey);
        if (!key) throw ValidationError(std::string(kEnvApiKey) + " is not set (use --mock for the offline backend)");
        HttpClientOptions http;
        http.base_url = env(kEnvApiBase).value_or(a.api_base);
        if (http.base_url.empty())
            throw ValidationError("no endpoint: pass --api-base or set " + std::string(kEnvApiBase));
        http.api_key = *key;
        http.requests_per_minute = a.rpm;
        http.timeout_seconds = a.timeout;
        endpoint = http.base_url;
        client = std::make_unique<HttpChatClient>(http);
    }
    config.endpoint = endpoint;

    require_dir(a.corpus, "corpus store");
    Store store{fs::path(a.corpus)};
    Corpus corpus = store.load();
    auto metas = read_meta(a.metadata.empty() ? store.meta.string() : a.metadata);

    if (a.source != "changes" && a.source != "reports" && a.source != "all")
        throw ValidationError("--source must be changes, reports or all");
    std::vector<PolicyEntry> entries;
    for (const auto& b : corpus.buckets()) {
        if (a.source != "changes")
            for (const auto& r : b.reports)
                if (!a.capital_only || is_capital_control(r.index)) entries.emplace_back(r);
        if (a.source != "reports")
            for (const auto& c : b.changes)
                if (!a.capital_only || (c.index && is_capital_control(*c.index))) entries.emplace_back(c);
    }

    const fs::path dest(a.out);
    const fs::path events_path = dest / "events.jsonl";
    std::set<std::string> done;
    if (a.resume && fs::exists(events_path)) {
        auto in = open_in(events_path);
        std::string line;
        while (std::getline(in, line)) {
            json j = json::parse(line, nullptr, false);
            if (!j.is_discarded() && j.contains("id") && j.at("id").is_string()) done.insert(j.at("id").get<std::string>());
        }
    }
    std::vector<PolicyEntry> todo;
    for (auto& e : entries)
        if (!done.count(entry_id(e))) todo.push_back(std::move(e));
    // Repeated identical entries share an id; extract each id once.
    {
        std::set<std::string> seen;
        std::vector<PolicyEntry> unique;
        for (auto& e : todo)
            if (seen.insert(entry_id(e)).second) unique.push_back(std::move(e));
        todo = std::move(unique);
    }

    auto events_out = open_out(events_path, a.resume);
    auto failures_out = open_out(dest / "failures.jsonl");
    std::size_t finished = 0;
    const std::size_t total = todo.size();
    auto sink = [&](std::size_t, const CcmEvent* e, const FailureRecord* f) {
        if (e) events_out << dump_line(event_to_json(*e)) << '\n';
        if (f) failures_out << to_jsonl(*f) << '\n';
        ++finished;
        if (finished == total || finished % 25 == 0) err << "extract: " << finished << '/' << total << '\n';
    };
    BatchResult res = run_batch(todo, metas, config, *client, sink);
    close_checked(events_out, events_path);
    close_checked(failures_out, dest / "failures.jsonl");

    auto cfg = config_header("extract");
    cfg["corpus"] = a.corpus;
    cfg["out"] = a.out;
    cfg["backend"] = a.mock ? "mock" : "http";
    cfg["endpoint"] = endpoint;
    cfg["model"] = config.model;
    cfg["temperature"] = config.temperature;
    cfg["max_parallel"] = config.max_parallel;
    cfg["retry_budget"] = config.retry_budget;
    cfg["requests_per_minute"] = config.requests_per_minute;
    cfg["source"] = a.source;
    cfg["capital_only"] = a.capital_only;
    cfg["resume"] = a.resume;
    cfg["prompt_fingerprint"] = hex64(fnv1a64(PromptSet::standard().system_prompt));
    cfg["entries"] = entries.size() + done.size();
    cfg["skipped_existing"] = done.size();
    cfg["events"] = res.events.size();
    cfg["failures"] = res.failures.size();
    write_run_config(dest, cfg);
    out << "extracted " << res.events.size() << " events, " << res.failures.size() << " failures";
    if (!done.empty()) out << ", " << done.size() << " already present";
    out << '\n';
    return kExitOk;
}

// ----------------------------------------------------------- build-train

struct BuildTrainArgs {
    std::string corpus;
    std::string out;
    std::string metadata;
    std::string taxonomy;
    std::string split;
    std::uint64_t seed = 42;
    std::string sources = "all";
};

int cmd_build_train(const BuildTrainArgs& a, std::ostream& out, std::ostream&) {
    require_dir(a.corpus, "corpus store");
    if (a.sources != "all" && a.sources != "reports" && a.sources != "changes")
        throw ValidationError("--sources must be all, reports or changes");
    SplitSpec spec = parse_split(a.split, a.seed);
    Store store{fs::path(a.corpus)};
    Corpus corpus = store.load();
    auto metas = read_meta(a.metadata.empty() ? store.meta.string() : a.metadata);

    std::optional<Taxonomy> custom;
    if (!a.taxonomy.empty()) {
        require_file(a.taxonomy, "taxonomy");
        auto in = open_in(a.taxonomy);
        custom = with_path(a.taxonomy, [&] { return Taxonomy::from_csv(in); });
    }
    const Taxonomy& taxonomy = custom ? *custom : Taxonomy::builtin();
    const std::string system = build_classifier_system_message(taxonomy);

    std::vector<TrainingPair> pairs;
    ChangePairs cp;
    if (a.sources != "changes") pairs = build_final_report_pairs(corpus);
    if (a.sources != "reports") {
        cp = build_change_pairs(corpus);
        std::move(cp.pairs.begin(), cp.pairs.end(), std::back_inserter(pairs));
    }
    std::vector<TrainingExample> examples;
    for (const auto& p : pairs) {
        if (p.is_capital_control && !taxonomy.find(p.gold_index)) {
            cp.skips.push_back({p.country, p.year, p.gold_index, "index not in taxonomy"});
            continue;
        }
        examples.push_back(to_chat_example(p, taxonomy, system));
    }

    DatasetSplits splits = split_dataset(examples, spec);
    const fs::path dest(a.out);
    auto write_split = [&](const char* name, const std::vector<TrainingExample>& xs) {
        write_file(dest / name, [&](std::ostream& o) {
            for (const auto& x : xs) o << to_jsonl(x) << '\n';
        });
    };
    write_split("train.jsonl", splits.train);
    write_split("validation.jsonl", splits.validation);
    write_split("test.jsonl", splits.test);
    write_file(dest / "skips.jsonl", [&](std::ostream& o) {
        for (const auto& s : cp.skips) o << to_jsonl(s) << '\n';
    });

    DatasetDistribution d = dataset_distribution(examples, metas);
    write_file(dest / "distribution_year.csv", [&](std::ostream& o) {
        o << "year,count\n";
        for (const auto& [y, c] : d.by_year) o << y << ',' << c << '\n';
    });
    auto simple = [&](const char* name, const char* key, const std::map<std::string, std::size_t>& m) {
        write_file(dest / name, [&](std::ostream& o) {
            o << key << ",count\n";
            for (const auto& [k, c] : m) o << csv_escape(k) << ',' << c << '\n';
        });
    };
    simple("distribution_income_group.csv", "income_group", d.by_income_group);
    simple("distribution_region.csv", "region", d.by_region);
    write_file(dest / "distribution_category.csv", [&](std::ostream& o) {
        o << "category,count,mean_word_count\n";
        for (const auto& [k, c] : d.by_category)
            o << csv_escape(k) << ',' << c.count << ',' << format_fixed(c.mean_word_count, 2) << '\n';
    });
    write_file(dest / "split_composition.csv", [&](std::ostream& o) {
        o << "split,examples,capital_control,other\n";
        auto row = [&](const char* name, const std::vector<TrainingExample>& xs) {
            std::size_t cc = 0;
            for (const auto& x : xs) cc += x.is_capital_control ? 1 : 0;
            o << name << ',' << xs.size() << ',' << cc << ',' << xs.size() - cc << '\n';
        };
        row("train", splits.train);
        row("validation", splits.validation);
        row("test", splits.test);
    });

    auto cfg = config_header("build-train");
    cfg["corpus"] = a.corpus;
    cfg["out"] = a.out;
    cfg["taxonomy"] = a.taxonomy.empty() ? "builtin" : a.taxonomy;
    cfg["sources"] = a.sources;
    cfg["split"] = {{"train", spec.train_size}, {"validation", spec.validation_size}, {"test", spec.test_size}};
    cfg["seed"] = spec.seed;
    cfg["examples"] = examples.size();
    cfg["capital_control"] = d.capital_control;
    cfg["other"] = d.other;
    cfg["skips"] = cp.skips.size();
    write_run_config(dest, cfg);
    out << "built " << examples.size() << " examples (train " << splits.train.size() << ", validation "
        << splits.validation.size() << ", test " << splits.test.size() << "; test capital-control "
        << splits.test_composition.capital_control << ", other " << splits.test_composition.other << "), "
        << cp.skips.size() << " skipped\n";
    return kExitOk;
}

// -------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::vector<std::string> predictions;
    std::string out;
    std::string designated;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
    std::vector<PredictionRecord> records;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : a.predictions) {
        require_file(p, "predictions file");
        auto in = open_in(p);
        auto recs = with_path(p, [&] { return load_predictions(in); });
        for (auto& r : recs) {
            if (!seen.emplace(r.model, r.id).second)
                throw ValidationError(p + ": duplicate id '" + r.id + "' for model '" + r.model + "'");
            records.push_back(std::move(r));
        }
    }
    ReportTable table = build_report(records, a.designated);
    const fs::path dest(a.out);
    write_file(dest / "report.csv", [&](std::ostream& o) { write_report_csv(o, table); });
    write_file(dest / "report.txt", [&](std::ostream& o) { write_report_text(o, table); });

    auto cfg = config_header("evaluate");
    cfg["predictions"] = a.predictions;
    cfg["out"] = a.out;
    cfg["designated"] = table.delta ? table.delta->model : a.designated;
    cfg["best_baseline"] = table.delta ? table.delta->best_baseline : "";
    cfg["records"] = records.size();
    write_run_config(dest, cfg);
    write_report_text(out, table);
    return kExitOk;
}

// ----------------------------------------------------------- event-study

struct EventStudyArgs {
    std::string events;
    std::string holdings;
    std::string out;
    std::string cluster = "country";
    std::string flow_def = "delta";
    std::string overlap = "saturate";
    std::string unit = "position";
    int window = 6;
    int max_iterations = 10000;
    std::vector<std::string> countries;
};

int cmd_event_study(const EventStudyArgs& a, std::ostream& out, std::ostream& err) {
    auto cluster = parse_cluster_level(a.cluster);
    auto flow = parse_flow_definition(a.flow_def);
    auto overlap = parse_overlap_policy(a.overlap);
    auto unit = parse_panel_unit(a.unit);
    if (!cluster) throw ValidationError("--cluster must be fund or country");
    if (!flow) throw ValidationError("--flow-def must be delta or level");
    if (!overlap) throw ValidationError("--overlap must be saturate or drop");
    if (!unit) throw ValidationError("--unit must be position or country");
    if (*unit == PanelUnit::country && *cluster == ClusterLevel::fund)
        throw ValidationError("--cluster fund needs --unit position");
    if (a.window < 1) throw ValidationError("--window must be at least 1");

    auto events = read_events(a.events);
    require_file(a.holdings, "holdings file");
    auto hin = open_in(a.holdings);
    auto holdings = with_path(a.holdings, [&] { return load_holdings(hin); });

    std::set<std::string> countries;
    for (const auto& c : a.countries) countries.insert(normalize_country(c));
    EventSelection sel = select_events(events, countries);
    err << "event-study: " << sel.events.size() << " events selected (" << sel.not_inward << " not inward, "
        << sel.neutral << " neutral, " << sel.undated << " undated, " << sel.collapsed << " collapsed)\n";

    auto panel = *unit == PanelUnit::position ? compute_position_flows(holdings, *flow) : compute_flows(holdings, *flow);
    EventFrame frame = build_event_frame(panel, sel.events, a.window, *overlap);
    if (frame.undefined_rows) err << "event-study: " << frame.undefined_rows << " panel rows with zero base excluded\n";

    EventStudyOptions opts;
    opts.cluster = *cluster;
    opts.max_iterations = a.max_iterations;
    EventStudyResult res = estimate_event_study(frame, opts);

    const fs::path dest(a.out);
    write_file(dest / "coefficients.csv", [&](std::ostream& o) { write_coefficients_csv(o, res); });
    write_file(dest / "means.csv", [&](std::ostream& o) { write_means_csv(o, res.means); });
    write_file(dest / "window_accounting.csv", [&](std::ostream& o) {
        o << "group,events,emitted,missing,tagged_rows\n";
        for (const auto& [g, acc] : frame.accounting)
            o << to_string(g) << ',' << acc.events << ',' << acc.emitted << ',' << acc.missing << ','
              << acc.tagged_rows << '\n';
    });

    auto cfg = config_header("event-study");
    cfg["events"] = a.events;
    cfg["holdings"] = a.holdings;
    cfg["out"] = a.out;
    cfg["cluster"] = to_string(*cluster);
    cfg["flow_def"] = to_string(*flow);
    cfg["overlap"] = to_string(*overlap);
    cfg["unit"] = to_string(*unit);
    cfg["window"] = a.window;
    cfg["countries"] = std::vector<std::string>(countries.begin(), countries.end());
    cfg["observations"] = res.observations;
    cfg["clusters"] = res.clusters;
    cfg["units"] = res.units;
    cfg["months"] = res.months;
    cfg["demean_iterations"] = res.demean_iterations;
    cfg["dropped_overlapping"] = frame.dropped_overlapping;
    write_run_config(dest, cfg);
    out << "estimated " << res.coefficients.size() << " coefficients from " << res.observations
        << " observations in " << res.clusters << " clusters\n";
    return kExitOk;
}

// ----------------------------------------------------------------- stats

struct StatsArgs {
    std::string events;
    std::string out;
};

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream&) {
    auto events = read_events(a.events);
    EventStats s = event_stats(events);
    const fs::path dest(a.out);
    write_file(dest / "by_year_category.csv", [&](std::ostream& o) { write_count_csv(o, s.by_year_category); });
    write_file(dest / "by_year_region.csv", [&](std::ostream& o) { write_count_csv(o, s.by_year_region); });
    write_file(dest / "cumulative_by_action.csv",
               [&](std::ostream& o) { write_cumulative_csv(o, s.cumulative_by_action); });
    write_file(dest / "by_year_intensity_income.csv",
               [&](std::ostream& o) { write_count_csv(o, s.by_year_intensity_income); });
    write_file(dest / "by_year_direction_income.csv",
               [&](std::ostream& o) { write_count_csv(o, s.by_year_direction_income); });
    auto cfg = config_header("stats");
    cfg["events"] = a.events;
    cfg["out"] = a.out;
    cfg["event_count"] = events.size();
    write_run_config(dest, cfg);
    out << "summarized " << events.size() << " events\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    CLI::App app{"Capital control measures pipeline: corpus ingestion, event extraction, training data, "
                 "evaluation and event studies.",
                 "ccm"};
    app.set_config("--config", "", "TOML/INI config file; flags override it and CCM_API_BASE overrides flags");
    app.set_version_flag("--version", CCM_VERSION);
    app.require_subcommand(1);

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Normalize a raw corpus directory into the corpus store");
    ingest->add_option("--corpus", ia.corpus, "Raw corpus directory (final_reports/, yearly_changes/)")->required();
    ingest->add_option("--out", ia.out, "Output directory")->required();
    ingest->add_option("--metadata", ia.metadata, "Country metadata CSV (default: <corpus>/country_meta.csv)");

    ExtractArgs ea;
    auto* extract = app.add_subcommand("extract", "Extract structured events with a chat-completion backend");
    extract->add_option("--corpus", ea.corpus, "Corpus store written by ingest")->required();
    extract->add_option("--out", ea.out, "Output directory")->required();
    extract->add_option("--metadata", ea.metadata, "Country metadata CSV (default: the store's copy)");
    extract->add_flag("--mock", ea.mock, "Use the deterministic offline backend");
    extract->add_flag("--resume", ea.resume, "Skip entries whose ids are already in events.jsonl");
    extract->add_option("--source", ea.source, "Entries to extract: changes, reports or all")
        ->check(CLI::IsMember({"changes", "reports", "all"}))
        ->capture_default_str();
    extract->add_flag("--capital-only", ea.capital_only, "Only entries under the capital-control section");
    extract->add_option("--model", ea.model, "Model identifier")->capture_default_str();
    extract->add_option("--max-parallel", ea.max_parallel, "Requests in flight")->capture_default_str();
    extract->add_option("--retry-budget", ea.retry_budget, "Re-asks per entry after a failure")->capture_default_str();
    extract->add_option("--rpm", ea.rpm, "Requests per minute, 0 for unlimited")->capture_default_str();
    extract->add_option("--api-base", ea.api_base, "Endpoint base URL (CCM_API_BASE overrides)");
    extract->add_option("--timeout", ea.timeout, "HTTP timeout in seconds")->capture_default_str();

    BuildTrainArgs ba;
    auto* build = app.add_subcommand("build-train", "Build chat-format training, validation and test files");
    build->add_option("--corpus", ba.corpus, "Corpus store written by ingest")->required();
    build->add_option("--out", ba.out, "Output directory")->required();
    build->add_option("--split", ba.split, "Sizes as train,validation,test")->required();
    build->add_option("--seed", ba.seed, "Split seed")->capture_default_str();
    build->add_option("--metadata", ba.metadata, "Country metadata CSV (default: the store's copy)");
    build->add_option("--taxonomy", ba.taxonomy, "Taxonomy CSV (default: built-in)");
    build->add_option("--sources", ba.sources, "Pair sources: all, reports or changes")
        ->check(CLI::IsMember({"all", "reports", "changes"}))
        ->capture_default_str();

    EvaluateArgs va;
    auto* evaluate = app.add_subcommand("evaluate", "Score prediction files and print the accuracy table");
    evaluate->add_option("--predictions,predictions", va.predictions, "Prediction JSONL files")->required();
    evaluate->add_option("--out", va.out, "Output directory")->required();
    evaluate->add_option("--designated", va.designated, "Model compared against the best baseline");

    EventStudyArgs sa;
    auto* study = app.add_subcommand("event-study", "Estimate fund-flow responses around inward events");
    study->add_option("--events", sa.events, "Events JSONL from extract")->required();
    study->add_option("--holdings", sa.holdings, "Holdings CSV")->required();
    study->add_option("--out", sa.out, "Output directory")->required();
    study->add_option("--cluster", sa.cluster, "Cluster level: fund or country")
        ->check(CLI::IsMember({"fund", "country"}))
        ->capture_default_str();
    study->add_option("--flow-def", sa.flow_def, "Flow definition: delta or level")
        ->check(CLI::IsMember({"delta", "level"}))
        ->capture_default_str();
    study->add_option("--overlap", sa.overlap, "Overlapping windows: saturate or drop")
        ->check(CLI::IsMember({"saturate", "drop"}))
        ->capture_default_str();
    study->add_option("--unit", sa.unit, "Panel unit: position (fund x country) or country")
        ->check(CLI::IsMember({"position", "country"}))
        ->capture_default_str();
    study->add_option("--window", sa.window, "Months on each side of the event")->capture_default_str();
    study->add_option("--max-iterations", sa.max_iterations, "Demeaning iteration cap")->capture_default_str();
    study->add_option("--countries", sa.countries, "Restrict events to these countries")->delimiter(',');

    StatsArgs ta;
    auto* stats = app.add_subcommand("stats", "Aggregate event counts for descriptive tables");
    stats->add_option("--events", ta.events, "Events JSONL from extract")->required();
    stats->add_option("--out", ta.out, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << CCM_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "ccm: " << e.what() << '\n';
        err << "run 'ccm --help' for usage\n";
        return kExitValidation;
    }

    if (auto base = env(kEnvApiBase)) ea.api_base = *base;

    try {
        if (*ingest) return cmd_ingest(ia, out, err);
        if (*extract) return cmd_extract(ea, out, err, env);
        if (*build) return cmd_build_train(ba, out, err);
        if (*evaluate) return cmd_evaluate(va, out, err);
        if (*study) return cmd_event_study(sa, out, err);
        if (*stats) return cmd_stats(ta, out, err);
    } catch (const IoError& e) {
        err << "ccm: I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "ccm: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "ccm: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitValidation;
}

}  // namespace ccm::cli
