#include "support/fixtures.hpp"
#include "support/schema.hpp"

#include "gterms/config.hpp"
#include "gterms/pipeline.hpp"
#include "gterms/server.hpp"

#include <httplib.h>

#include <gtest/gtest.h>

#include <fstream>
#include <thread>

using namespace gterms;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

testkit::SchemaChecker& schema() {
    static testkit::SchemaChecker checker = [] {
        std::ifstream in(GTERMS_API_SCHEMA);
        return testkit::SchemaChecker(json::parse(in));
    }();
    return checker;
}

// One finished run shared by every test; each test gets its own ledger file.
class ServerTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        scratch_ = new testkit::ScratchDir("server");
        const fs::path src = fs::path(GTERMS_FIXTURES) / "two_field";
        const fs::path dst = scratch_->path() / "input";
        fs::create_directories(dst);
        for (const auto& e : fs::directory_iterator(src))
            if (e.is_regular_file()) fs::copy_file(e.path(), dst / e.path().filename());
        auto cfg = RunConfig::load(dst / "run.ini");
        cfg.output_dir = scratch_->path() / "runs";
        run_ = pipeline::LoadedRun::load(pipeline::run_pipeline(cfg).run_dir);
    }
    static void TearDownTestSuite() {
        run_.reset();
        delete scratch_;
        scratch_ = nullptr;
    }

    void SetUp() override { start({}); }
    void TearDown() override { shutdown(); }

    void start(std::string cors) {
        shutdown();
        server::ServerOptions opts;
        opts.port = 0;
        opts.cors_origin = std::move(cors);
        opts.ledger_path = scratch_->path() / ("themes-" + std::to_string(counter_++) + ".json");
        server_ = std::make_unique<server::ApiServer>(run_, opts);
        port_ = server_->bind();
        thread_ = std::thread([this] { server_->listen(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        for (int i = 0; i < 200 && !server_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }

    void shutdown() {
        if (!server_) return;
        server_->stop();
        thread_.join();
        server_.reset();
    }

    // Checks the status against the documented responses and validates the body.
    json expect_response(const httplib::Result& r, const std::string& templ, const std::string& method, int status) {
        EXPECT_TRUE(r) << method << " " << templ;
        if (!r) return {};
        EXPECT_EQ(r->status, status) << method << " " << templ << ": " << r->body;
        EXPECT_EQ(r->get_header_value("Content-Type").rfind("application/json", 0), 0u);
        json body = json::parse(r->body);
        try {
            const auto errors = schema().validate(body, schema().response_schema(templ, method, r->status));
            for (const auto& e : errors) ADD_FAILURE() << method << " " << templ << " " << r->status << ": " << e;
        } catch (const std::out_of_range&) {
            ADD_FAILURE() << "undocumented response " << r->status << " for " << method << " " << templ;
        }
        return body;
    }

    json get(const std::string& url, const std::string& templ, int status = 200) {
        return expect_response(client_->Get(url), templ, "get", status);
    }

    json send(const std::string& method, const std::string& url, const std::string& templ, const json& body,
              int status) {
        const std::string text = body.dump();
        httplib::Result r = method == "post"  ? client_->Post(url, text, "application/json")
                            : method == "put" ? client_->Put(url, text, "application/json")
                                              : client_->Delete(url, text, "application/json");
        return expect_response(r, templ, method, status);
    }

    static testkit::ScratchDir* scratch_;
    static std::shared_ptr<const pipeline::LoadedRun> run_;
    static int counter_;

    std::unique_ptr<server::ApiServer> server_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

testkit::ScratchDir* ServerTest::scratch_ = nullptr;
std::shared_ptr<const pipeline::LoadedRun> ServerTest::run_;
int ServerTest::counter_ = 0;

}  // namespace

TEST_F(ServerTest, RunAndFields) {
    const auto info = get("/api/run", "/api/run");
    EXPECT_EQ(info["run_id"], run_->run_id());
    const auto fields = get("/api/fields", "/api/fields");
    EXPECT_EQ(fields, json::parse(run_->field_ratios().dump()));
}

TEST_F(ServerTest, Terms) {
    const auto f = get("/api/terms?gender=F", "/api/terms");
    EXPECT_EQ(f["rows"][0]["term"], "wellbeing");
    const auto m = get("/api/terms?gender=male&scope=overall", "/api/terms");
    EXPECT_NE(m["rows"][0]["term"], "wellbeing");
    const auto field = get("/api/terms?gender=F&scope=3301", "/api/terms");
    for (const auto& row : field["rows"]) EXPECT_EQ(row["list"], "F");
    get("/api/terms", "/api/terms", 400);
    get("/api/terms?gender=X", "/api/terms", 400);
    get("/api/terms?gender=F&scope=9999", "/api/terms", 404);
    const auto cross = get("/api/terms/crossfield?gender=M", "/api/terms/crossfield");
    EXPECT_TRUE(cross.contains("rows"));
    get("/api/terms/crossfield", "/api/terms/crossfield", 400);
}

TEST_F(ServerTest, Kwic) {
    const auto a = get("/api/kwic?term=wellbeing&n=5&seed=3", "/api/kwic");
    ASSERT_EQ(a["samples"].size(), 5u);
    for (const auto& s : a["samples"]) {
        const std::string text = s["text"];
        for (const auto& m : s["matches"])
            EXPECT_EQ(text.substr(m["offset"].get<std::size_t>(), m["length"].get<std::size_t>()), "wellbeing");
    }
    const auto b = get("/api/kwic?term=wellbeing&n=5&seed=3", "/api/kwic");
    EXPECT_EQ(a, b);
    const auto male = get("/api/kwic?term=wellbeing&n=50&gender=M&scope=3302", "/api/kwic");
    for (const auto& s : male["samples"]) {
        EXPECT_EQ(s["gender"], "M");
        const auto codes = s["fields"].get<std::vector<std::string>>();
        EXPECT_NE(std::find(codes.begin(), codes.end(), "3302"), codes.end());
    }
    get("/api/kwic?term=wellbeing&scope=biased&gender=F", "/api/kwic");
    get("/api/kwic?term=absent", "/api/kwic", 404);
    get("/api/kwic", "/api/kwic", 400);
    get("/api/kwic?term=wellbeing&n=zero", "/api/kwic", 400);
    get("/api/kwic?term=wellbeing&n=0", "/api/kwic", 400);
    get("/api/kwic?term=wellbeing&gender=Q", "/api/kwic", 400);
}

TEST_F(ServerTest, Cooccurrence) {
    const auto all = get("/api/cooccur?term=wellbeing&limit=5", "/api/cooccur");
    EXPECT_LE(all["rows"].size(), 5u);
    get("/api/cooccur?term=wellbeing&baseline=same-gender-docs&gender=F", "/api/cooccur");
    get("/api/cooccur?term=wellbeing&baseline=same-gender-docs", "/api/cooccur", 400);
    get("/api/cooccur?term=wellbeing&baseline=bogus", "/api/cooccur", 400);
    get("/api/cooccur?term=absent", "/api/cooccur", 404);
}

TEST_F(ServerTest, RepeatedReadsAreIdentical) {
    for (const char* url : {"/api/run", "/api/fields", "/api/terms?gender=F", "/api/themes"}) {
        const auto a = client_->Get(url);
        const auto b = client_->Get(url);
        ASSERT_TRUE(a && b);
        EXPECT_EQ(a->body, b->body) << url;
    }
}

TEST_F(ServerTest, ThemeCrudRoundTrip) {
    auto ledger = get("/api/themes", "/api/themes");
    EXPECT_EQ(ledger["revision"], 0);

    ledger = send("post", "/api/themes", "/api/themes", {{"base_revision", 0}, {"name", "Care"}, {"gender", "F"}}, 201);
    EXPECT_EQ(ledger["revision"], 1);
    ledger = send("post", "/api/themes/Care/terms", "/api/themes/{name}/terms",
                  {{"base_revision", 1}, {"term", "wellbeing"}}, 201);
    EXPECT_EQ(ledger["revision"], 2);
    ledger = send("put", "/api/themes/Care/terms/kadebi10", "/api/themes/{name}/terms/{term}",
                  {{"base_revision", 2}, {"indirect", true}}, 200);
    EXPECT_EQ(ledger["revision"], 3);
    ledger = send("put", "/api/themes/Care", "/api/themes/{name}",
                  {{"base_revision", 3}, {"new_name", "Wellness"}, {"notes", "n"}}, 200);
    EXPECT_EQ(ledger["revision"], 5);  // rename + notes
    ledger = send("delete", "/api/themes/Wellness/terms/kadebi10", "/api/themes/{name}/terms/{term}",
                  {{"base_revision", 5}}, 200);
    EXPECT_EQ(ledger["revision"], 6);

    const auto audit = get("/api/themes/audit", "/api/themes/audit");
    EXPECT_EQ(audit["entries"].size(), 6u);
    const auto report = get("/api/themes/validate", "/api/themes/validate");
    EXPECT_EQ(report["revision"], 6);

    ledger = send("delete", "/api/themes/Wellness?base_revision=6", "/api/themes/{name}", json::object(), 200);
    EXPECT_EQ(ledger["revision"], 7);
    EXPECT_TRUE(server_->ledger().read().themes().empty());
}

TEST_F(ServerTest, ThemeWriteErrors) {
    send("post", "/api/themes", "/api/themes", {{"base_revision", 0}, {"name", "Care"}, {"gender", "F"}}, 201);
    const auto conflict =
        send("post", "/api/themes", "/api/themes", {{"base_revision", 0}, {"name", "X"}, {"gender", "F"}}, 409);
    EXPECT_EQ(conflict["error"]["current_revision"], 1);
    send("post", "/api/themes", "/api/themes", {{"name", "X"}, {"gender", "F"}}, 400);
    send("post", "/api/themes", "/api/themes", {{"base_revision", 1}, {"name", "X"}, {"gender", "Z"}}, 400);
    send("post", "/api/themes", "/api/themes", {{"base_revision", 1}, {"name", "Care"}, {"gender", "F"}}, 400);
    send("put", "/api/themes/Nowhere", "/api/themes/{name}", {{"base_revision", 1}, {"notes", "x"}}, 404);
    send("put", "/api/themes/Care", "/api/themes/{name}", {{"base_revision", 1}}, 400);
    send("delete", "/api/themes/Care/terms/absent", "/api/themes/{name}/terms/{term}", {{"base_revision", 1}}, 404);
    const auto r = client_->Post("/api/themes", "{broken", "application/json");
    expect_response(r, "/api/themes", "post", 400);
    EXPECT_EQ(server_->ledger().revision(), 1);
}

TEST_F(ServerTest, ConcurrentWritesOnSameRevision) {
    for (int round = 0; round < 10; ++round) {
        const long long base = server_->ledger().revision();
        std::vector<int> statuses(2);
        std::vector<std::thread> threads;
        for (int t = 0; t < 2; ++t)
            threads.emplace_back([&, t] {
                httplib::Client c("127.0.0.1", port_);
                const json body{{"base_revision", base},
                                {"name", "T" + std::to_string(round) + "_" + std::to_string(t)},
                                {"gender", "M"}};
                const auto r = c.Post("/api/themes", body.dump(), "application/json");
                statuses[t] = r ? r->status : -1;
            });
        for (auto& th : threads) th.join();
        std::sort(statuses.begin(), statuses.end());
        EXPECT_EQ(statuses, (std::vector<int>{201, 409}));
        EXPECT_EQ(server_->ledger().revision(), base + 1);
    }
}

TEST_F(ServerTest, CorsHeaders) {
    auto r = client_->Get("/api/run");
    ASSERT_TRUE(r);
    EXPECT_FALSE(r->has_header("Access-Control-Allow-Origin"));
    start("http://localhost:5173");
    r = client_->Get("/api/run");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
    const auto pre = client_->Options("/api/themes");
    ASSERT_TRUE(pre);
    EXPECT_EQ(pre->status, 204);
    EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("PUT"), std::string::npos);
}

TEST_F(ServerTest, UnknownRouteIsJson404) {
    const auto r = client_->Get("/api/nothing");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 404);
    EXPECT_TRUE(json::parse(r->body).contains("error"));
}
