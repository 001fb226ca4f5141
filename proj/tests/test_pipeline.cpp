#include "support/fixtures.hpp"

#include "gterms/config.hpp"
#include "gterms/error.hpp"
#include "gterms/pipeline.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

using namespace gterms;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '\t')) cells.push_back(cell);
        if (!line.empty() && line.back() == '\t') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

// Copies the bundled two-field example into a scratch directory.
fs::path copy_fixture(const fs::path& into) {
    const fs::path dst = into / "two_field";
    fs::create_directories(dst);
    for (const auto& e : fs::directory_iterator(GTERMS_FIXTURES "/two_field"))
        if (e.is_regular_file()) fs::copy_file(e.path(), dst / e.path().filename());
    return dst / "run.ini";
}

void expect_stage_error(const RunConfig& cfg, const std::string& stage) {
    try {
        pipeline::prepare(cfg);
        ADD_FAILURE() << "expected a " << stage << " error";
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()).rfind(stage + ":", 0), 0u) << e.what();
    }
}

}  // namespace

// Config

TEST(RunConfig, LoadResolvesPathsAgainstIniDirectory) {
    testkit::ScratchDir dir("pipeline");
    const auto ini = copy_fixture(dir.path());
    const auto cfg = RunConfig::load(ini);
    EXPECT_EQ(cfg.corpus, ini.parent_path() / "records.csv");
    EXPECT_EQ(cfg.min_fields, 2u);
    EXPECT_DOUBLE_EQ(cfg.min_share, 1.0);
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.k, 20u);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
    testkit::ScratchDir dir("pipeline");
    std::ofstream(dir.path() / "a.ini") << "[thresholds]\nmin_feilds = 3\n";
    EXPECT_THROW(RunConfig::load(dir.path() / "a.ini"), ConfigError);
    std::ofstream(dir.path() / "b.ini") << "[thresholds]\nalpha = often\n";
    EXPECT_THROW(RunConfig::load(dir.path() / "b.ini"), ConfigError);
    EXPECT_THROW(RunConfig::load(dir.path() / "missing.ini"), IoError);

    RunConfig cfg;
    EXPECT_THROW(cfg.set("nonsense", "1"), ConfigError);
    EXPECT_THROW(cfg.set("k", "-2"), ConfigError);
    EXPECT_THROW(cfg.validate(), ConfigError);  // no inputs
}

TEST(RunConfig, ValidateRangeChecks) {
    testkit::ScratchDir dir("pipeline");
    const auto base = RunConfig::load(copy_fixture(dir.path()));
    auto check = [&](const char* key, const char* value) {
        auto cfg = base;
        cfg.set(key, value);
        EXPECT_THROW(cfg.validate(), ConfigError) << key << "=" << value;
    };
    check("min_share", "0.4");
    check("alpha", "0");
    check("alpha", "1");
    check("name_threshold", "0.4");
    check("k", "0");
    check("overlap", "0.5");
}

TEST(RunConfig, EnvironmentOverrides) {
    RunConfig cfg;
    ::setenv("GTERMS_MIN_FIELDS", "18", 1);
    ::setenv("GTERMS_POLICY", "never", 1);
    cfg.apply_env();
    ::unsetenv("GTERMS_MIN_FIELDS");
    ::unsetenv("GTERMS_POLICY");
    EXPECT_EQ(cfg.min_fields, 18u);
    EXPECT_EQ(cfg.to_json()["min_fields"], 18);
    for (const auto& key : RunConfig::keys()) EXPECT_TRUE(cfg.to_json().contains(key)) << key;
}

// Prepare

TEST(Prepare, StageTaggedErrors) {
    testkit::ScratchDir dir("pipeline");
    const auto base = RunConfig::load(copy_fixture(dir.path()));
    auto cfg = base;
    cfg.corpus = dir.path() / "nope.csv";
    expect_stage_error(cfg, "ingest");
    cfg = base;
    cfg.names = dir.path() / "nope.csv";
    expect_stage_error(cfg, "gender");
    cfg = base;
    cfg.min_share = 0.2;
    expect_stage_error(cfg, "config");
    cfg = base;
    cfg.countries = {"Atlantis"};
    expect_stage_error(cfg, "ingest");
}

TEST(Prepare, MalformedRowsAreCounted) {
    testkit::ScratchDir dir("pipeline");
    const auto ini = copy_fixture(dir.path());
    std::ofstream(ini.parent_path() / "records.csv", std::ios::app) << "broken-row,only,three\n";
    const auto p = pipeline::prepare(RunConfig::load(ini));
    EXPECT_EQ(p.row_errors, 1u);
    EXPECT_FALSE(p.diagnostics.empty());
}

TEST(Prepare, ExcludesSmallFieldAndDeduplicates) {
    testkit::ScratchDir dir("pipeline");
    const auto p = pipeline::prepare(RunConfig::load(copy_fixture(dir.path())));
    const auto kept = p.field_filter.kept_codes();
    EXPECT_EQ(kept, (std::set<std::string>{"3301", "3302"}));
    EXPECT_LT(p.deduplicated.size(), p.corpus.size());
    EXPECT_EQ(p.index.partition_size(textprep::TermIndex::overall, Gender::female), 240u);
    EXPECT_EQ(p.index.partition_size(textprep::TermIndex::overall, Gender::male), 240u);
}

// Full run

TEST(RunPipeline, WritesEveryReportFile) {
    testkit::ScratchDir dir("pipeline");
    auto cfg = RunConfig::load(copy_fixture(dir.path()));
    cfg.output_dir = dir.path() / "out";
    const auto result = pipeline::run_pipeline(cfg);
    EXPECT_EQ(result.run_dir, cfg.output_dir / ("run-" + result.run_id.substr(0, 16)));
    EXPECT_TRUE(std::regex_match(result.run_id, std::regex("[0-9a-f]{64}")));

    for (const char* f : {"field_ratios", "overall_terms_f", "overall_terms_m", "crossfield_f", "crossfield_m",
                          "field_terms/3301", "field_terms/3302"}) {
        ASSERT_TRUE(fs::exists(result.run_dir / (std::string(f) + ".tsv"))) << f;
        const auto j = nlohmann::json::parse(slurp(result.run_dir / (std::string(f) + ".json")));
        EXPECT_TRUE(j.contains("columns")) << f;
        const auto tsv = read_tsv(result.run_dir / (std::string(f) + ".tsv"));
        ASSERT_FALSE(tsv.empty());
        EXPECT_EQ(tsv[0], j["columns"].get<std::vector<std::string>>()) << f;
        for (const auto& row : tsv) EXPECT_EQ(row.size(), tsv[0].size()) << f;
    }
    for (const char* f : {"significance.json", "run_report.json", "index.json"})
        EXPECT_NO_THROW((void)nlohmann::json::parse(slurp(result.run_dir / f))) << f;
    std::ifstream diag(result.run_dir / "diagnostics.jsonl");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(diag, line)) {
        EXPECT_NO_THROW((void)nlohmann::json::parse(line));
        ++lines;
    }
    EXPECT_GT(lines, 0u);

    const auto report = nlohmann::json::parse(slurp(result.run_dir / "run_report.json"));
    EXPECT_EQ(report["format"], "gterms-run-report");
    EXPECT_EQ(report["run_id"], result.run_id);
    EXPECT_EQ(report["counts"]["row_errors"], 0);
    EXPECT_EQ(report["fields"]["kept"], 2);
    EXPECT_EQ(report["fields"]["excluded"].size(), 2u);
}

TEST(RunPipeline, NumberFormatting) {
    testkit::ScratchDir dir("pipeline");
    auto cfg = RunConfig::load(copy_fixture(dir.path()));
    cfg.output_dir = dir.path() / "out";
    const auto run = pipeline::run_pipeline(cfg).run_dir;
    const std::regex two_dp(R"(\d+\.\d\d|\d+/0|)");
    const std::regex one_dp(R"(\d+\.\d)");
    const std::regex count_share(R"(\d+ \(\d+%\))");

    const auto ratios = read_tsv(run / "field_ratios.tsv");
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        EXPECT_TRUE(std::regex_match(ratios[i][7], two_dp)) << ratios[i][7];
        EXPECT_TRUE(std::regex_match(ratios[i][9], two_dp)) << ratios[i][9];
    }
    const auto terms = read_tsv(run / "overall_terms_f.tsv");
    ASSERT_GT(terms.size(), 1u);
    EXPECT_EQ(terms[1][1], "wellbeing");
    for (std::size_t i = 1; i < terms.size(); ++i) {
        EXPECT_TRUE(std::regex_match(terms[i][2], two_dp)) << terms[i][2];
        EXPECT_TRUE(std::regex_match(terms[i][4], one_dp)) << terms[i][4];
        EXPECT_TRUE(std::regex_match(terms[i][7], count_share)) << terms[i][7];
    }
    const auto field = read_tsv(run / "field_terms" / "3301.tsv");
    for (std::size_t i = 1; i < field.size(); ++i) EXPECT_TRUE(std::regex_match(field[i][5], one_dp));
}

TEST(RunPipeline, RunIdTracksInputsNotOutputLocation) {
    testkit::ScratchDir dir("pipeline");
    const auto ini = copy_fixture(dir.path());
    auto cfg = RunConfig::load(ini);
    const auto id = pipeline::run_id(cfg);
    cfg.output_dir = dir.path() / "elsewhere";
    EXPECT_EQ(pipeline::run_id(cfg), id);
    cfg.k = 10;
    EXPECT_NE(pipeline::run_id(cfg), id);
    cfg.k = 20;
    std::ofstream(ini.parent_path() / "names.csv", std::ios::app) << "zelda,0.99,F\n";
    EXPECT_NE(pipeline::run_id(cfg), id);
}

TEST(LoadedRun, RoundTripsRunDirectory) {
    testkit::ScratchDir dir("pipeline");
    auto cfg = RunConfig::load(copy_fixture(dir.path()));
    cfg.output_dir = dir.path() / "out";
    const auto result = pipeline::run_pipeline(cfg);
    const auto run = pipeline::LoadedRun::load(result.run_dir);
    EXPECT_EQ(run->run_id(), result.run_id);
    EXPECT_EQ(run->k(), 20u);
    EXPECT_EQ(run->policy(), stats::CorrectionPolicy::auto_yates);
    EXPECT_NE(run->field_terms("3301"), nullptr);
    EXPECT_EQ(run->field_terms("9999"), nullptr);
    EXPECT_EQ(run->overall_terms(Gender::female)["rows"][0]["term"], "wellbeing");

    const auto prepared = pipeline::prepare(cfg);
    EXPECT_EQ(run->index().snapshot(), prepared.index.snapshot());
    EXPECT_EQ(run->corpus().size(), prepared.deduplicated.size());
    const auto& per_field = run->per_field();
    const auto direct = pipeline::all_field_top_terms(prepared.index, 20, cfg.policy, nullptr);
    ASSERT_EQ(per_field.size(), direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        ASSERT_EQ(per_field[i].female.entries.size(), direct[i].female.entries.size());
        for (std::size_t j = 0; j < direct[i].female.entries.size(); ++j)
            EXPECT_EQ(per_field[i].female.entries[j].term, direct[i].female.entries[j].term);
    }
    EXPECT_THROW(pipeline::LoadedRun::load(dir.path() / "nothing"), IoError);
}

TEST(AllFieldTopTerms, MatchesSerialComputation) {
    testkit::ScratchDir dir("pipeline");
    testkit::PlantSpec spec;
    spec.fields = 6;
    spec.docs_per_gender = 80;
    const auto files = testkit::write_plant_fixture(dir.path(), spec);
    const auto p = pipeline::prepare(RunConfig::load(files.config));
    Diagnostics warnings;
    const auto parallel = pipeline::all_field_top_terms(p.index, 20, p.config.policy, &warnings);
    const auto codes = p.index.fields();
    ASSERT_EQ(parallel.size(), codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const auto serial = analysis::per_field_top_terms(p.index, codes[i], 20, p.config.policy);
        EXPECT_EQ(parallel[i].field, codes[i]);
        ASSERT_EQ(parallel[i].male.entries.size(), serial.male.entries.size());
        for (std::size_t j = 0; j < serial.male.entries.size(); ++j)
            EXPECT_EQ(parallel[i].male.entries[j].term, serial.male.entries[j].term);
    }
}
