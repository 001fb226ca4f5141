#include "fixtures.hpp"

#include "gterms/csv.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unistd.h>

namespace gterms::testkit {

namespace fs = std::filesystem;

Table1Corpus table1_corpus(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::string>> female(kTable1Female), male(kTable1Male);
    auto plant = [&](std::vector<std::vector<std::string>>& docs, const char* term, std::uint64_t count) {
        std::vector<std::size_t> order(docs.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::uint64_t i = 0; i < count; ++i) docs[order[i]].push_back(term);
    };
    for (const auto& row : kTable1) {
        plant(female, row.term, row.female);
        plant(male, row.term, row.male);
    }

    Table1Corpus out;
    out.catalog.add({kTable1Field, "Palliative care", "Medicine"});
    std::vector<ingest::ArticleRecord> records;
    auto emit = [&](const std::vector<std::vector<std::string>>& docs, Gender g, const char* prefix) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            ingest::ArticleRecord r;
            r.article_id = std::string(prefix) + std::to_string(1000 + i);
            r.year = 2015;
            r.field_codes = {kTable1Field};
            r.given_name = g == Gender::female ? "Anna" : "John";
            r.title = "Filler";
            for (const auto& t : docs[i]) r.abstract_text += t + " ";
            out.labels.set(r.article_id, g);
            records.push_back(std::move(r));
        }
    };
    emit(female, Gender::female, "F");
    emit(male, Gender::male, "M");
    out.corpus = ingest::Corpus(std::move(records), ingest::CorpusMode::deduplicated);
    return out;
}

namespace {

const char* kFemaleNames[] = {"anna", "maria", "elena", "sofia", "laura", "julia", "clara", "ines"};
const char* kMaleNames[] = {"john", "peter", "marco", "david", "paul", "tomas", "erik", "lucas"};

std::string background_word(std::size_t i) {
    static const char* onset[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z"};
    static const char* vowel[] = {"a", "e", "i", "o", "u"};
    std::string w;
    std::size_t x = i + 7;
    for (int syll = 0; syll < 3; ++syll) {
        w += onset[x % 13];
        x /= 13;
        w += vowel[(i + syll) % 5];
    }
    return w + std::to_string(i);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

PlantFiles write_plant_fixture(const fs::path& dir, const PlantSpec& spec) {
    fs::create_directories(dir);
    PlantFiles files{dir / "run.ini",     dir / "records.csv",    dir / "names.csv",
                     dir / "catalog.csv", dir / "validation.csv", dir / "columns.ini"};
    std::mt19937_64 rng(spec.seed);
    std::bernoulli_distribution background(spec.background_rate), high(spec.planted_high), low(spec.planted_low),
        duplicate(0.1), coin(0.5);

    std::vector<std::string> words;
    for (std::size_t i = 0; i < spec.background_words; ++i) words.push_back(background_word(i));

    std::vector<std::string> codes;
    for (std::size_t f = 0; f < spec.fields; ++f) codes.push_back(std::to_string(3301 + f));
    const std::string small_code = "3399";

    std::ostringstream rec;
    csv::write_row(rec, {"EID", "PubYear", "ASJC", "FirstName", "Country", "Title", "Abstract", "AuthorKeywords"});
    struct Doc {
        std::string id;
        Gender gender;
        std::string name;
    };
    std::vector<Doc> docs;
    std::size_t serial = 0;

    auto make_doc = [&](const std::string& code, Gender g, const std::string& name, bool plant) {
        const std::string id = "2-s2.0-" + std::to_string(85000000000ULL + serial++);
        std::vector<std::string> terms;
        for (const auto& w : words)
            if (background(rng)) terms.push_back(w);
        if (plant) {
            if (g == Gender::female ? high(rng) : low(rng)) terms.push_back(spec.female_term);
            if (g == Gender::male ? high(rng) : low(rng)) terms.push_back(spec.male_term);
        }
        std::shuffle(terms.begin(), terms.end(), rng);
        std::string title = "Study", abstract, keywords;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (i < 4)
                title += " " + terms[i];
            else if (i + 2 < terms.size())
                abstract += (abstract.empty() ? "" : " ") + terms[i];
            else
                keywords += (keywords.empty() ? "" : "; ") + terms[i];
        }
        title[6] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[6])));
        abstract += ". Results, discussion and \"implications\" follow.";
        std::string field_codes = code;
        std::string extra;
        if (code != small_code && duplicate(rng)) {
            // Listed again under a neighbouring field, as per-field exports do.
            const auto pos = std::find(codes.begin(), codes.end(), code) - codes.begin();
            extra = codes[(pos + 1) % codes.size()];
        }
        const std::string country = coin(rng) ? "United Kingdom" : "United States";
        csv::write_row(rec, {id, std::to_string(2014 + serial % 5), field_codes, name, country, title, abstract, keywords});
        if (!extra.empty())
            csv::write_row(rec, {id, std::to_string(2014 + serial % 5), extra, name, country, title, abstract, keywords});
        docs.push_back({id, g, name});
    };

    for (const auto& code : codes) {
        for (Gender g : {Gender::female, Gender::male}) {
            const auto& pool = g == Gender::female ? kFemaleNames : kMaleNames;
            for (std::size_t i = 0; i < spec.docs_per_gender; ++i) {
                std::string name = pool[rng() % 8];
                name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
                if (i % 7 == 0) name += " B.";
                make_doc(code, g, name, true);
            }
        }
        for (std::size_t i = 0; i < spec.unknown_docs; ++i)
            make_doc(code, Gender::unknown, i % 2 ? "J." : "Alex", true);
    }
    for (std::size_t i = 0; i < spec.small_field_docs; ++i)
        make_doc(small_code, i % 2 ? Gender::female : Gender::male, i % 2 ? "Maria" : "Peter", false);
    write_text(files.records, rec.str());

    std::ostringstream names;
    names << "name,gender,share\n";
    for (const char* n : kFemaleNames) names << n << ",F,0.97\n";
    for (const char* n : kMaleNames) names << n << ",M,0.98\n";
    names << "alex,M,0.62\n";
    write_text(files.names, names.str());

    std::ostringstream catalog;
    catalog << "code,narrow_name,broad_name\n";
    for (std::size_t f = 0; f < codes.size(); ++f)
        catalog << codes[f] << ",Synthetic field " << char('A' + f) << ",Social Sciences\n";
    catalog << small_code << ",Small field,Arts and Humanities\n";
    catalog << "3398,Empty field,Arts and Humanities\n";
    write_text(files.catalog, catalog.str());

    // Manual labels: agree with the name table, resolve some unknowns, and
    // disagree on a few.
    std::ostringstream validation;
    validation << "article_id,manual_gender\n";
    for (std::size_t i = 0; i < docs.size(); i += 23) {
        const auto& d = docs[i];
        Gender manual = d.gender;
        if (d.gender == Gender::unknown) manual = i % 2 ? Gender::male : Gender::female;
        else if (i % 5 == 0) manual = other(d.gender);
        validation << d.id << "," << gender_code(manual) << "\n";
    }
    write_text(files.validation, validation.str());

    write_text(files.columns,
               "[columns]\narticle_id = EID\nyear = PubYear\nfield_codes = ASJC\ngiven_name = FirstName\n"
               "country = Country\ntitle = Title\nabstract = Abstract\nkeywords = AuthorKeywords\n\n"
               "[format]\nfield_code_delimiter = |\nkeyword_delimiter = ;\n");

    write_text(files.config,
               "[inputs]\ncorpus = records.csv\nnames = names.csv\nvalidation = validation.csv\n"
               "catalog = catalog.csv\ncolumns = columns.ini\n\n"
               "[thresholds]\nmin_fields = " + std::to_string(spec.fields) + "\nmin_share = 1.0\n\n"
               "[analysis]\nseed = 7\n\n[output]\ndir = runs\n");
    return files;
}

ScratchDir::ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::map<std::string, std::string> snapshot_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        out[fs::relative(entry.path(), dir).generic_string()] = s.str();
    }
    return out;
}

}  // namespace gterms::testkit
