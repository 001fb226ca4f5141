#include "gterms/pipeline.hpp"

#include "gterms/error.hpp"
#include "gterms/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace gterms::pipeline {

namespace fs = std::filesystem;

namespace {

// Runs `fn`, prefixing any error with the stage name.
template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConflictError&) {
        throw;
    } catch (const Error& e) {
        throw Error(std::string(name) + ": " + e.what(), e.exit_code());
    } catch (const std::exception& e) {
        throw DataError(std::string(name) + ": " + e.what());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json parse_json_file(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_table(const fs::path& dir, const std::string& stem, const report::Table& table,
                 const nlohmann::ordered_json& meta = nlohmann::ordered_json::object()) {
    write_file(dir / (stem + ".tsv"), report::render(table, report::Format::tsv));
    nlohmann::ordered_json j = meta;
    const auto body = report::to_json(table);
    for (const auto& [k, v] : body.items()) j[k] = v;
    write_file(dir / (stem + ".json"), j.dump(2) + "\n");
}

nlohmann::ordered_json diagnostics_json(const Diagnostics& diags) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& d : diags) out.push_back(nlohmann::ordered_json(d.to_json()));
    return out;
}

nlohmann::ordered_json bound_json(const stats::UnionBound& b) {
    return {{"fields", b.fields}, {"threshold", b.threshold}, {"per_term", b.per_term}, {"probability", b.probability}};
}

nlohmann::ordered_json model_json(const stats::BinomialModel& m) {
    return {{"fields", m.fields},
            {"hit_probability", m.hit_probability},
            {"threshold", m.threshold},
            {"vocab_size", m.vocab_size},
            {"overlap", m.overlap}};
}

nlohmann::ordered_json overall_meta(const analysis::OverallTermsResult& r, double overall_fm) {
    nlohmann::ordered_json j;
    j["gender"] = gender_code(r.list.gender);
    j["overall_fm"] = overall_fm;
    j["scored"] = r.scored;
    j["degenerate"] = r.degenerate;
    j["leaning"] = r.leaning;
    j["selected"] = r.selected;
    j["bh_rejected"] = r.bh_rejected;
    j["min_significant_chi2"] = r.min_significant_chi2 ? nlohmann::ordered_json(*r.min_significant_chi2)
                                                       : nlohmann::ordered_json();
    return j;
}

}  // namespace

std::string field_file_stem(std::string_view code) {
    std::string out;
    for (unsigned char c : code) out += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? char(c) : '_';
    return out.empty() ? "_" : out;
}

Prepared prepare(const RunConfig& config) {
    stage("config", [&] {
        config.validate();
        return 0;
    });
    Prepared p;
    p.config = config;
    p.format = stage("config", [&] { return config.columns.empty() ? ingest::FormatConfig{} : ingest::FormatConfig::load(config.columns); });

    auto parsed = stage("ingest", [&] { return ingest::parse_records(config.corpus, p.format); });
    p.records_read = parsed.corpus.size();
    p.row_errors = parsed.row_errors;
    p.diagnostics = std::move(parsed.diagnostics);

    p.catalog = stage("ingest", [&] {
        auto c = ingest::FieldCatalog::load(config.catalog);
        c.set_min_gendered_articles(config.min_field_size);
        ingest::check_field_codes(parsed.corpus, c);
        return c;
    });

    const ingest::Corpus filtered = stage("ingest", [&] {
        return ingest::apply_country_filter(parsed.corpus, ingest::CountryFilter{config.countries});
    });
    p.after_country_filter = filtered.size();
    if (filtered.empty()) throw DataError("ingest: no records left after parsing and country filtering");

    const auto names = stage("gender", [&] {
        return gender::NameGenderTable::load(config.names, config.name_threshold, &p.diagnostics);
    });
    p.labels = stage("gender", [&] { return gender::label_corpus(filtered, names); });

    p.factors = stage("gender", [&] {
        if (!config.validation.empty()) {
            const auto sample = gender::ValidationSample::load(config.validation);
            return gender::FactorTable(
                gender::estimate_correction_factors(gender::tally_validation(sample, parsed.corpus, names)));
        }
        gender::CorrectionFactors f;
        if (config.male_factor) {
            f.male_multiplier = *config.male_factor;
            f.female_multiplier = *config.female_factor;
        } else {
            p.diagnostics.push_back(warning("gender", "no validation sample or factors configured; using 1.0"));
        }
        return gender::FactorTable(f);
    });

    p.field_filter = stage("ingest", [&] { return ingest::filter_min_size(filtered, p.catalog, p.labels); });
    for (const auto& f : p.field_filter.excluded)
        if (f.gendered_articles > 0)
            p.diagnostics.push_back(warning("ingest", "field " + f.code + " excluded: " +
                                                          std::to_string(f.gendered_articles) +
                                                          " gender-labelled articles"));
    if (p.field_filter.kept.empty())
        throw DataError("ingest: no field reaches " + std::to_string(config.min_field_size) +
                        " gender-labelled articles");

    p.corpus = stage("ingest", [&] { return ingest::restrict_to_fields(filtered, p.field_filter.kept_codes()); });
    p.deduplicated = stage("ingest", [&] { return ingest::dedupe_articles(p.corpus); });

    p.index = stage("textprep", [&] {
        textprep::TextOptions options;
        options.deplural = config.deplural;
        if (!config.stoplist.empty()) options.stoplist = textprep::load_stoplist(config.stoplist);
        return textprep::TermIndex::build(p.deduplicated, p.labels, p.catalog, options);
    });
    return p;
}

std::vector<analysis::FieldTopTerms> all_field_top_terms(const textprep::TermIndex& index, std::size_t k,
                                                         stats::CorrectionPolicy policy, Diagnostics* warnings) {
    const auto fields = index.fields();
    std::vector<std::optional<analysis::FieldTopTerms>> slots(fields.size());
    std::vector<std::string> errors(fields.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < fields.size();) {
            try {
                slots[i] = analysis::per_field_top_terms(index, fields[i], k, policy);
            } catch (const DataError& e) {
                errors[i] = e.what();
            }
        }
    };
    const std::size_t n = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < std::min(n, fields.size()); ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    std::vector<analysis::FieldTopTerms> out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (slots[i]) {
            if (warnings) warnings->insert(warnings->end(), slots[i]->warnings.begin(), slots[i]->warnings.end());
            out.push_back(std::move(*slots[i]));
        } else if (warnings) {
            warnings->push_back(warning("field-terms", "field " + fields[i] + " skipped: " + errors[i]));
        }
    }
    return out;
}

Analysis analyze(const Prepared& p) {
    const auto& cfg = p.config;
    Analysis a;
    a.ratios = stage("ratios", [&] {
        return analysis::field_participation(p.corpus, p.labels, p.factors, p.catalog, p.field_filter.kept_codes());
    });

    const auto nf = p.index.partition_size(textprep::TermIndex::overall, Gender::female);
    const auto nm = p.index.partition_size(textprep::TermIndex::overall, Gender::male);
    if (nf == 0 || nm == 0) throw DataError("terms: the corpus needs articles of both genders");
    a.overall_fm = static_cast<double>(nf) / static_cast<double>(nm);

    const analysis::OverallParams params{cfg.top_n, cfg.rank_n, cfg.alpha, cfg.policy};
    a.female = stage("terms", [&] { return analysis::overall_gendered_terms(p.index, Gender::female, params); });
    a.male = stage("terms", [&] { return analysis::overall_gendered_terms(p.index, Gender::male, params); });
    a.diagnostics.insert(a.diagnostics.end(), a.female.warnings.begin(), a.female.warnings.end());
    a.diagnostics.insert(a.diagnostics.end(), a.male.warnings.begin(), a.male.warnings.end());

    a.per_field = stage("field-terms", [&] { return all_field_top_terms(p.index, cfg.k, cfg.policy, &a.diagnostics); });
    a.tally = stage("tally", [&] {
        return analysis::cross_field_tally(a.per_field, analysis::TallyParams{cfg.min_fields, cfg.min_share});
    });
    a.significance = stage("tally", [&] {
        return analysis::tally_significance(a.tally, p.index, cfg.k, cfg.min_fields, cfg.overlap);
    });
    if (!a.significance)
        a.diagnostics.push_back(warning("tally", "no term passes the cross-field thresholds; significance not computed"));
    return a;
}

std::string run_id(const RunConfig& config) {
    auto echo = config.to_json();
    echo.erase("output_dir");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 unavailable");
    auto feed = [&](const std::string& s) {
        const std::string len = std::to_string(s.size()) + ":";
        EVP_DigestUpdate(ctx.get(), len.data(), len.size());
        EVP_DigestUpdate(ctx.get(), s.data(), s.size());
    };
    feed(echo.dump());
    for (const auto* path : {&config.corpus, &config.names, &config.validation, &config.catalog, &config.stoplist,
                             &config.columns})
        feed(path->empty() ? std::string() : read_file(*path));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

RunResult run_pipeline(const RunConfig& config) {
    const Prepared p = prepare(config);
    const Analysis a = analyze(p);

    RunResult result;
    result.run_id = stage("output", [&] { return run_id(config); });
    result.run_dir = config.output_dir / ("run-" + result.run_id.substr(0, 16));
    result.row_errors = p.row_errors;
    result.diagnostics = p.diagnostics;
    result.diagnostics.insert(result.diagnostics.end(), a.diagnostics.begin(), a.diagnostics.end());

    stage("output", [&] {
        const fs::path tmp = config.output_dir / (".tmp-" + result.run_id.substr(0, 16) + "-" + std::to_string(::getpid()));
        fs::remove_all(tmp);
        fs::create_directories(tmp / "field_terms");

        write_table(tmp, "field_ratios", report::field_ratio_table(a.ratios));
        write_table(tmp, "overall_terms_f", report::overall_terms_table(a.female, a.overall_fm), overall_meta(a.female, a.overall_fm));
        write_table(tmp, "overall_terms_m", report::overall_terms_table(a.male, a.overall_fm), overall_meta(a.male, a.overall_fm));

        nlohmann::ordered_json field_files = nlohmann::ordered_json::object();
        for (const auto& f : a.per_field) {
            const auto* info = p.catalog.find(f.field);
            nlohmann::ordered_json meta;
            meta["field"] = f.field;
            meta["name"] = info ? info->narrow_name : "";
            meta["broad_field"] = info ? info->broad_name : "";
            meta["female_docs"] = f.female_docs;
            meta["male_docs"] = f.male_docs;
            const std::string stem = field_file_stem(f.field);
            field_files[f.field] = "field_terms/" + stem + ".json";
            write_table(tmp / "field_terms", stem, report::field_terms_table(f), meta);
        }

        for (Gender g : {Gender::female, Gender::male}) {
            nlohmann::ordered_json meta;
            meta["gender"] = gender_code(g);
            meta["analyzed_fields"] = a.tally.analyzed_fields;
            meta["min_fields"] = config.min_fields;
            meta["min_share"] = config.min_share;
            write_table(tmp, g == Gender::female ? "crossfield_f" : "crossfield_m", report::crossfield_table(a.tally, g), meta);
        }

        nlohmann::ordered_json sig;
        sig["analyzed_fields"] = a.tally.analyzed_fields;
        sig["k"] = config.k;
        sig["min_fields"] = config.min_fields;
        sig["min_share"] = config.min_share;
        sig["selected_terms"] = a.tally.selected.size();
        if (a.significance) {
            const auto& s = *a.significance;
            sig["data"] = {{"min_doc_frequency", s.min_doc_frequency},
                           {"eligible_vocab", s.eligible_vocab},
                           {"model", model_json(s.model)},
                           {"unadjusted", bound_json(s.unadjusted)},
                           {"adjusted", bound_json(s.adjusted)}};
        } else {
            sig["data"] = nullptr;
        }
        const stats::BinomialModel reference;
        sig["reference"] = {{"model", model_json(reference)},
                            {"unadjusted", bound_json(stats::tally_union_bound(reference, false))},
                            {"adjusted", bound_json(stats::tally_union_bound(reference, true))}};
        write_file(tmp / "significance.json", sig.dump(2) + "\n");

        nlohmann::ordered_json rep;
        rep["format"] = "gterms-run-report";
        rep["version"] = 1;
        rep["run_id"] = result.run_id;
        rep["config"] = config.to_json();
        rep["counts"] = {{"records_read", p.records_read},
                         {"row_errors", p.row_errors},
                         {"after_country_filter", p.after_country_filter},
                         {"per_field_records", p.corpus.size()},
                         {"articles", p.deduplicated.size()},
                         {"indexed_female", p.index.partition_size(textprep::TermIndex::overall, Gender::female)},
                         {"indexed_male", p.index.partition_size(textprep::TermIndex::overall, Gender::male)},
                         {"overall_fm", a.overall_fm}};
        rep["correction_factors"] = p.factors.global().to_json();
        nlohmann::ordered_json excluded = nlohmann::ordered_json::array();
        for (const auto& f : p.field_filter.excluded)
            excluded.push_back({{"code", f.code}, {"gendered_articles", f.gendered_articles}});
        rep["fields"] = {{"kept", p.field_filter.kept.size()}, {"excluded", excluded}, {"field_terms", field_files}};
        rep["overall_terms"] = {{"female", overall_meta(a.female, a.overall_fm)},
                                {"male", overall_meta(a.male, a.overall_fm)},
                                {"reference_min_significant_chi2", {{"female", 48.4}, {"male", 55.7}}}};
        rep["warnings"] = diagnostics_json(result.diagnostics);
        write_file(tmp / "run_report.json", rep.dump(2) + "\n");

        std::string lines;
        for (const auto& d : result.diagnostics) lines += d.to_json().dump() + "\n";
        write_file(tmp / "diagnostics.jsonl", lines);

        write_file(tmp / "index.json", p.index.snapshot().dump() + "\n");
        std::ostringstream corpus_csv;
        ingest::write_records(corpus_csv, p.deduplicated, ingest::FormatConfig{});
        write_file(tmp / "corpus.csv", corpus_csv.str());

        fs::remove_all(result.run_dir);
        fs::rename(tmp, result.run_dir);
        return 0;
    });
    return result;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const LoadedRun> LoadedRun::load(const fs::path& run_dir) {
    auto run = std::make_shared<LoadedRun>();
    run->dir_ = run_dir;
    if (!fs::is_directory(run_dir)) throw IoError("run directory not found: " + run_dir.string());
    run->report_ = parse_json_file(run_dir / "run_report.json");
    if (run->report_.value("format", "") != "gterms-run-report")
        throw DataError(run_dir.string() + " does not contain a run report");
    run->run_id_ = run->report_.at("run_id").get<std::string>();
    run->field_ratios_ = parse_json_file(run_dir / "field_ratios.json");
    run->overall_f_ = parse_json_file(run_dir / "overall_terms_f.json");
    run->overall_m_ = parse_json_file(run_dir / "overall_terms_m.json");
    run->crossfield_f_ = parse_json_file(run_dir / "crossfield_f.json");
    run->crossfield_m_ = parse_json_file(run_dir / "crossfield_m.json");
    for (const auto& [code, rel] : run->report_.at("fields").at("field_terms").items())
        run->field_terms_[code] = parse_json_file(run_dir / rel.get<std::string>());
    run->index_ = textprep::TermIndex::from_snapshot(parse_json_file(run_dir / "index.json"));
    auto parsed = ingest::parse_records(run_dir / "corpus.csv", ingest::FormatConfig{});
    if (parsed.row_errors) throw DataError("corrupt corpus.csv in " + run_dir.string());
    run->corpus_ = ingest::Corpus(parsed.corpus.records(), ingest::CorpusMode::deduplicated);
    return run;
}

const nlohmann::json& LoadedRun::overall_terms(Gender g) const { return g == Gender::male ? overall_m_ : overall_f_; }
const nlohmann::json& LoadedRun::crossfield(Gender g) const { return g == Gender::male ? crossfield_m_ : crossfield_f_; }

const nlohmann::json* LoadedRun::field_terms(std::string_view code) const {
    auto it = field_terms_.find(code);
    return it == field_terms_.end() ? nullptr : &it->second;
}

std::size_t LoadedRun::k() const { return report_.at("config").at("k").get<std::size_t>(); }

stats::CorrectionPolicy LoadedRun::policy() const {
    return stats::parse_policy(report_.at("config").at("policy").get<std::string>());
}

const std::vector<analysis::FieldTopTerms>& LoadedRun::per_field() const {
    std::call_once(per_field_once_, [this] { per_field_ = all_field_top_terms(index_, k(), policy(), nullptr); });
    return per_field_;
}

}  // namespace gterms::pipeline
