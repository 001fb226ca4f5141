// gterms command-line entry point.

#include "gterms/analysis.hpp"
#include "gterms/config.hpp"
#include "gterms/error.hpp"
#include "gterms/pipeline.hpp"
#include "gterms/report.hpp"
#include "gterms/server.hpp"
#include "gterms/stats.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <fstream>
#include <map>
#include <set>

using namespace gterms;

namespace {

struct Common {
    std::string format = "tsv";
    bool lenient = false;
};

// --config plus one flag per RunConfig key (underscores become hyphens).
struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;

    void add(CLI::App* app, const std::set<std::string>& skip = {}) {
        app->add_option("--config", config_path, "INI run configuration");
        for (const auto& key : RunConfig::keys()) {
            if (skip.count(key)) continue;
            std::string flag = key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            app->add_option("--" + flag, values[key], "override config key " + key);
        }
    }

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        cfg.apply_env();
        for (const auto& [key, value] : values)
            if (!value.empty()) cfg.set(key, value);
        cfg.validate();
        return cfg;
    }
};

void emit(const report::Table& table, const Common& common) { std::cout << report::render(table, report::parse_format(common.format)); }

void print_warnings(const Diagnostics& diags) {
    for (const auto& d : diags) {
        std::cerr << (d.severity == Severity::error ? "error" : "warning") << " [" << d.stage << "] ";
        if (!d.file.empty()) std::cerr << d.file << (d.line ? ":" + std::to_string(*d.line) : "") << ": ";
        std::cerr << d.message << '\n';
    }
}

// Row errors fail the command unless --lenient.
int finish(const Diagnostics& diags, std::size_t row_errors, const Common& common) {
    print_warnings(diags);
    if (row_errors && !common.lenient) {
        std::cerr << "error: " << row_errors << " malformed input row(s); rerun with --lenient to accept\n";
        return static_cast<int>(ExitCode::data_error);
    }
    return 0;
}

Gender cli_gender(const std::string& s) {
    const Gender g = parse_gender(s);
    if (g == Gender::unknown) throw ConfigError("gender must be F or M");
    return g;
}

// Index and texts, from a finished run or by preparing from a config.
struct IndexSource {
    std::shared_ptr<const pipeline::LoadedRun> run;
    std::optional<pipeline::Prepared> prepared;

    const textprep::TermIndex& index() const { return run ? run->index() : prepared->index; }
    const ingest::Corpus& corpus() const { return run ? run->corpus() : prepared->deduplicated; }
    stats::CorrectionPolicy policy() const { return run ? run->policy() : prepared->config.policy; }
    std::size_t k() const { return run ? run->k() : prepared->config.k; }
};

IndexSource open_source(const std::string& run_dir, const ConfigFlags& flags) {
    IndexSource s;
    if (!run_dir.empty())
        s.run = pipeline::LoadedRun::load(run_dir);
    else
        s.prepared = pipeline::prepare(flags.resolve());
    return s;
}

server::ApiServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gendered term analysis of bibliographic records"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--format", common.format, "output format")->check(CLI::IsMember({"tsv", "json", "markdown"}));
    app.add_flag("--lenient", common.lenient, "accept malformed input rows (reported, then skipped)");

    // run
    ConfigFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "run the full pipeline into a content-addressed directory");
    run_flags.add(run_cmd);

    // ingest
    ConfigFlags ingest_flags;
    std::string ingest_out;
    auto* ingest_cmd = app.add_subcommand("ingest", "parse, label and filter records; list field sizes");
    ingest_flags.add(ingest_cmd);
    ingest_cmd->add_option("--write", ingest_out, "write the deduplicated corpus as CSV");

    // gender validate
    auto* gender_cmd = app.add_subcommand("gender", "gender inference utilities");
    gender_cmd->require_subcommand(1);
    ConfigFlags gv_flags;
    auto* gv_cmd = gender_cmd->add_subcommand("validate", "estimate correction factors from the validation sample");
    gv_flags.add(gv_cmd);

    // ratios
    ConfigFlags ratio_flags;
    auto* ratios_cmd = app.add_subcommand("ratios", "corrected F/M odds ratios per field");
    ratio_flags.add(ratios_cmd);

    // terms
    ConfigFlags terms_flags;
    std::string terms_gender = "F";
    auto* terms_cmd = app.add_subcommand("terms", "overall gendered terms");
    terms_flags.add(terms_cmd);
    terms_cmd->add_option("--gender", terms_gender, "F or M");

    // field-terms
    ConfigFlags ft_flags;
    std::string ft_field;
    auto* ft_cmd = app.add_subcommand("field-terms", "top terms per gender within one field");
    ft_flags.add(ft_cmd);
    ft_cmd->add_option("--field", ft_field, "narrow field code")->required();

    // tally
    ConfigFlags tally_flags;
    std::string tally_gender;
    auto* tally_cmd = app.add_subcommand("tally", "cross-field tally of per-field top terms");
    tally_flags.add(tally_cmd);
    tally_cmd->add_option("--gender", tally_gender, "F or M (default both)");

    // kwic
    ConfigFlags kwic_flags;
    std::string kwic_run, kwic_term, kwic_scope = "all", kwic_gender;
    std::optional<std::size_t> kwic_n;
    std::optional<std::uint64_t> kwic_seed;
    auto* kwic_cmd = app.add_subcommand("kwic", "seeded keyword-in-context sample");
    kwic_flags.add(kwic_cmd, {"seed"});
    kwic_cmd->add_option("--run", kwic_run, "finished run directory");
    kwic_cmd->add_option("--term", kwic_term)->required();
    kwic_cmd->add_option("--n", kwic_n, "sample size");
    kwic_cmd->add_option("--seed", kwic_seed, "sampling seed");
    kwic_cmd->add_option("--scope", kwic_scope, "all, biased or a field code");
    kwic_cmd->add_option("--gender", kwic_gender, "F or M");

    // cooccur
    ConfigFlags co_flags;
    std::string co_run, co_term, co_baseline = "all-other-docs", co_gender;
    std::size_t co_limit = 50;
    auto* co_cmd = app.add_subcommand("cooccur", "terms over-represented alongside an anchor term");
    co_flags.add(co_cmd);
    co_cmd->add_option("--run", co_run, "finished run directory");
    co_cmd->add_option("--term", co_term)->required();
    co_cmd->add_option("--baseline", co_baseline, "all-other-docs or same-gender-docs");
    co_cmd->add_option("--gender", co_gender, "F or M");
    co_cmd->add_option("--limit", co_limit, "rows to print (0 = all)");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "statistical primitives");
    stats_cmd->require_subcommand(1);
    std::uint64_t a = 0, b = 0, c = 0, d = 0;
    std::string policy = "auto";
    auto* chi2_cmd = stats_cmd->add_subcommand("chi2", "2x2 chi-squared for group-1 counts a/b and group-2 counts c/d");
    chi2_cmd->add_option("--a", a, "group 1 with term")->required();
    chi2_cmd->add_option("--b", b, "group 1 without term")->required();
    chi2_cmd->add_option("--c", c, "group 2 with term")->required();
    chi2_cmd->add_option("--d", d, "group 2 without term")->required();
    chi2_cmd->add_option("--policy", policy, "auto, never or always");

    double chi2_value = 0;
    auto* pv_cmd = stats_cmd->add_subcommand("pvalue", "upper-tail p-value of chi-squared with 1 df");
    pv_cmd->add_option("--chi2", chi2_value)->required()->check(CLI::NonNegativeNumber);

    double alpha = 0.05;
    std::vector<double> pvals;
    auto* bh_cmd = stats_cmd->add_subcommand("bh", "Benjamini-Hochberg and Bonferroni rejections");
    bh_cmd->add_option("--alpha", alpha);
    bh_cmd->add_option("p", pvals, "p-values")->required();

    std::uint64_t bn = 0, bt = 0;
    double bp = 0;
    auto* binom_cmd = stats_cmd->add_subcommand("binom", "binomial upper tail P(X >= t)");
    binom_cmd->add_option("--n", bn)->required();
    binom_cmd->add_option("--p", bp)->required();
    binom_cmd->add_option("--t", bt)->required();

    stats::BinomialModel model;
    auto* union_cmd = stats_cmd->add_subcommand("union", "union bound for a cross-field tally");
    union_cmd->add_option("--fields", model.fields);
    union_cmd->add_option("--p", model.hit_probability);
    union_cmd->add_option("--threshold", model.threshold);
    union_cmd->add_option("--vocab", model.vocab_size);
    union_cmd->add_option("--overlap", model.overlap);

    // serve
    std::string serve_run;
    server::ServerOptions serve_opts;
    std::string ledger_path, static_dir;
    auto* serve_cmd = app.add_subcommand("serve", "HTTP API over a finished run");
    serve_cmd->add_option("--run", serve_run, "finished run directory")->required();
    serve_cmd->add_option("--host", serve_opts.host);
    serve_cmd->add_option("--port", serve_opts.port);
    serve_cmd->add_option("--cors-origin", serve_opts.cors_origin);
    serve_cmd->add_option("--ledger", ledger_path, "theme ledger file");
    serve_cmd->add_option("--static", static_dir, "directory served at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::usage_error);
    }

    try {
        if (*run_cmd) {
            const auto result = pipeline::run_pipeline(run_flags.resolve());
            std::cout << result.run_dir.string() << '\n';
            return finish(result.diagnostics, result.row_errors, common);
        }
        if (*ingest_cmd) {
            const auto p = pipeline::prepare(ingest_flags.resolve());
            report::Table t;
            t.columns = {"code", "field", "broad_field", "gendered_articles", "status"};
            auto add = [&](const ingest::FieldCount& f, const char* status) {
                const auto* info = p.catalog.find(f.code);
                t.rows.push_back({f.code, info ? info->narrow_name : "", info ? info->broad_name : "",
                                  report::count_cell(f.gendered_articles), status});
            };
            for (const auto& f : p.field_filter.kept) add(f, "kept");
            for (const auto& f : p.field_filter.excluded) add(f, "excluded");
            emit(t, common);
            std::cerr << p.records_read << " records read, " << p.deduplicated.size() << " articles after dedup\n";
            if (!ingest_out.empty()) {
                std::ofstream out(ingest_out, std::ios::binary);
                if (!out) throw IoError("cannot write " + ingest_out);
                ingest::write_records(out, p.deduplicated, ingest::FormatConfig{});
            }
            return finish(p.diagnostics, p.row_errors, common);
        }
        if (*gv_cmd) {
            const auto p = pipeline::prepare(gv_flags.resolve());
            if (p.config.validation.empty()) throw ConfigError("gender validate needs a validation sample");
            const auto& f = p.factors.global();
            report::Table t;
            t.columns = {"gender", "manual", "automatic", "multiplier"};
            t.rows.push_back({"M", report::count_cell(f.counts.manual_male), report::count_cell(f.counts.auto_male),
                              report::Cell(report::fixed(f.male_multiplier, 3), f.male_multiplier)});
            t.rows.push_back({"F", report::count_cell(f.counts.manual_female), report::count_cell(f.counts.auto_female),
                              report::Cell(report::fixed(f.female_multiplier, 3), f.female_multiplier)});
            emit(t, common);
            return finish(p.diagnostics, p.row_errors, common);
        }
        if (*ratios_cmd) {
            const auto p = pipeline::prepare(ratio_flags.resolve());
            emit(report::field_ratio_table(analysis::field_participation(p.corpus, p.labels, p.factors, p.catalog,
                                                                          p.field_filter.kept_codes())),
                 common);
            return finish(p.diagnostics, p.row_errors, common);
        }
        if (*terms_cmd) {
            const auto p = pipeline::prepare(terms_flags.resolve());
            const auto& cfg = p.config;
            const auto result = analysis::overall_gendered_terms(p.index, cli_gender(terms_gender),
                                                                 {cfg.top_n, cfg.rank_n, cfg.alpha, cfg.policy});
            const double fm =
                static_cast<double>(p.index.partition_size(textprep::TermIndex::overall, Gender::female)) /
                static_cast<double>(p.index.partition_size(textprep::TermIndex::overall, Gender::male));
            emit(report::overall_terms_table(result, fm), common);
            auto diags = p.diagnostics;
            diags.insert(diags.end(), result.warnings.begin(), result.warnings.end());
            return finish(diags, p.row_errors, common);
        }
        if (*ft_cmd) {
            const auto p = pipeline::prepare(ft_flags.resolve());
            const auto f = analysis::per_field_top_terms(p.index, ft_field, p.config.k, p.config.policy);
            emit(report::field_terms_table(f), common);
            auto diags = p.diagnostics;
            diags.insert(diags.end(), f.warnings.begin(), f.warnings.end());
            return finish(diags, p.row_errors, common);
        }
        if (*tally_cmd) {
            const auto p = pipeline::prepare(tally_flags.resolve());
            auto diags = p.diagnostics;
            const auto per_field = pipeline::all_field_top_terms(p.index, p.config.k, p.config.policy, &diags);
            const auto tally = analysis::cross_field_tally(per_field, {p.config.min_fields, p.config.min_share});
            if (tally_gender.empty()) {
                auto t = report::crossfield_table(tally, Gender::female);
                for (auto& row : report::crossfield_table(tally, Gender::male).rows) t.rows.push_back(std::move(row));
                emit(t, common);
            } else {
                emit(report::crossfield_table(tally, cli_gender(tally_gender)), common);
            }
            std::cerr << tally.selected.size() << " term(s) selected across " << tally.analyzed_fields << " fields\n";
            return finish(diags, p.row_errors, common);
        }
        if (*kwic_cmd) {
            const auto src = open_source(kwic_run, kwic_flags);
            analysis::KwicQuery q;
            q.term = kwic_term;
            const RunConfig* cfg = src.prepared ? &src.prepared->config : nullptr;
            q.n = kwic_n.value_or(cfg ? cfg->kwic_n : src.run->report().at("config").at("kwic_n").get<std::size_t>());
            q.seed = kwic_seed.value_or(cfg ? cfg->seed : src.run->report().at("config").at("seed").get<std::uint64_t>());
            if (!kwic_gender.empty()) q.gender = cli_gender(kwic_gender);
            if (kwic_scope == "biased") {
                const auto per_field = src.run ? src.run->per_field()
                                               : pipeline::all_field_top_terms(src.index(), src.k(), src.policy(), nullptr);
                std::set<std::string> fields;
                for (Gender g : {Gender::female, Gender::male})
                    if (!q.gender || *q.gender == g) fields.merge(analysis::biased_fields(per_field, q.term, g));
                if (fields.empty()) throw NotFoundError("term '" + q.term + "' is in no field's top list");
                q.fields = std::move(fields);
            } else if (kwic_scope != "all") {
                q.fields = std::set<std::string>{kwic_scope};
            }
            const auto result = analysis::kwic_sample(src.index(), src.corpus(), q);
            if (common.format == "json")
                std::cout << report::kwic_json(result).dump(2) << '\n';
            else
                emit(report::kwic_table(result), common);
            print_warnings(result.warnings);
            return 0;
        }
        if (*co_cmd) {
            const auto src = open_source(co_run, co_flags);
            analysis::CooccurrenceQuery q;
            q.anchor = co_term;
            q.baseline = analysis::parse_baseline(co_baseline);
            if (!co_gender.empty()) q.gender = cli_gender(co_gender);
            q.policy = src.policy();
            q.limit = co_limit;
            emit(report::cooccurrence_table(analysis::cooccurrence_scan(src.index(), q)), common);
            return 0;
        }
        if (*chi2_cmd) {
            const auto s = stats::chi_square_2x2({a, b, c, d}, stats::parse_policy(policy));
            report::Table t;
            t.columns = {"chi_square", "p_value", "direction", "yates", "min_expected", "a", "b", "c", "d"};
            char p[32];
            std::snprintf(p, sizeof p, "%.4g", s.p_value);
            const char* dir = s.direction == stats::Direction::group1   ? "group1"
                              : s.direction == stats::Direction::group2 ? "group2"
                                                                        : "none";
            t.rows.push_back({report::Cell(report::fixed(s.chi2, 1), s.chi2), report::Cell(p, s.p_value), dir,
                              s.correction_applied ? "yes" : "no",
                              report::Cell(report::fixed(s.table.min_expected(), 2), s.table.min_expected()),
                              report::count_cell(a), report::count_cell(b), report::count_cell(c), report::count_cell(d)});
            emit(t, common);
            return 0;
        }
        if (*pv_cmd) {
            const double p = stats::chi_square_pvalue(chi2_value);
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", p);
            emit({{"chi_square", "p_value"}, {{report::Cell(report::fixed(chi2_value, 4), chi2_value), report::Cell(buf, p)}}},
                 common);
            return 0;
        }
        if (*bh_cmd) {
            const auto bh = stats::benjamini_hochberg(pvals, alpha);
            const auto bonf = stats::bonferroni(pvals, alpha);
            report::Table t;
            t.columns = {"index", "p_value", "bh", "bonferroni"};
            for (std::size_t i = 0; i < pvals.size(); ++i) {
                const bool in_bh = std::binary_search(bh.begin(), bh.end(), i);
                const bool in_bonf = std::binary_search(bonf.begin(), bonf.end(), i);
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.6g", pvals[i]);
                t.rows.push_back({report::count_cell(i), report::Cell(buf, pvals[i]), in_bh ? "reject" : "keep",
                                  in_bonf ? "reject" : "keep"});
            }
            emit(t, common);
            return 0;
        }
        if (*binom_cmd) {
            const double tail = stats::binomial_tail(bn, bp, bt);
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", tail);
            emit({{"n", "p", "t", "tail"},
                  {{report::count_cell(bn), report::Cell(std::to_string(bp), bp), report::count_cell(bt), report::Cell(buf, tail)}}},
                 common);
            return 0;
        }
        if (*union_cmd) {
            model.validate();
            report::Table t;
            t.columns = {"model", "fields", "threshold", "per_term", "probability"};
            for (bool adjusted : {false, true}) {
                const auto u = stats::tally_union_bound(model, adjusted);
                char per[32], prob[32];
                std::snprintf(per, sizeof per, "%.4g", u.per_term);
                std::snprintf(prob, sizeof prob, "%.4g", u.probability);
                t.rows.push_back({adjusted ? "adjusted" : "unadjusted", report::count_cell(u.fields),
                                  report::count_cell(u.threshold), report::Cell(per, u.per_term),
                                  report::Cell(prob, u.probability)});
            }
            emit(t, common);
            return 0;
        }
        if (*serve_cmd) {
            serve_opts.ledger_path = ledger_path;
            serve_opts.static_dir = static_dir;
            server::ApiServer srv(pipeline::LoadedRun::load(serve_run), serve_opts);
            const int port = srv.bind();
            g_server = &srv;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << serve_run << " on http://" << serve_opts.host << ":" << port << '\n';
            srv.listen();
            g_server = nullptr;
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data_error);
    }
    return static_cast<int>(ExitCode::usage_error);
}
