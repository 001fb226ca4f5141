#pragma once

#include "gterms/ingest.hpp"
#include "gterms/labels.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace gterms::testkit {

// One term row of the palliative-care field example: female and male
// article counts containing the term, and the published chi-squared.
struct Table1Row {
    const char* term;
    std::uint64_t female;
    std::uint64_t male;
    double chi2;
};

inline constexpr std::uint64_t kTable1Female = 124;
inline constexpr std::uint64_t kTable1Male = 41;
inline constexpr std::array<Table1Row, 20> kTable1{{
    {"nurse", 23, 0, 8.8},       {"support", 28, 3, 4.7},     {"home", 26, 3, 4.0},
    {"need", 30, 4, 3.9},        {"were", 72, 17, 3.4},       {"explored", 13, 0, 3.3},
    {"during", 18, 1, 3.3},      {"palliative", 12, 0, 3.0},  {"n", 19, 2, 3.0},
    {"reserved", 19, 2, 3.0},    {"right", 23, 3, 2.9},       {"experience", 23, 3, 2.9},
    {"end-of-life", 11, 0, 2.6}, {"all", 29, 5, 2.4},         {"important", 15, 1, 2.3},
    {"review", 15, 1, 2.3},      {"end", 15, 1, 2.3},         {"education", 21, 3, 2.3},
    {"illness", 10, 0, 2.2},     {"hospice", 10, 0, 2.2},
}};

inline constexpr const char* kTable1Field = "2718";

struct Table1Corpus {
    ingest::Corpus corpus;
    GenderLabels labels;
    ingest::FieldCatalog catalog;
};

// Single-field corpus whose document incidences equal the table's counts.
// Every article also carries one filler word so none is empty.
Table1Corpus table1_corpus(std::uint64_t seed = 1);

struct PlantSpec {
    std::size_t fields = 3;
    std::size_t docs_per_gender = 500;  // per field
    std::size_t background_words = 150;
    double background_rate = 0.3;
    double planted_high = 0.9;
    double planted_low = 0.1;
    std::size_t unknown_docs = 20;      // per field, initials or ambiguous names
    std::size_t small_field_docs = 12;  // one extra field below the size minimum
    std::uint64_t seed = 42;
    std::string female_term = "wellbeing";
    std::string male_term = "torque";
};

struct PlantFiles {
    std::filesystem::path config;  // run.ini referencing the files below
    std::filesystem::path records;
    std::filesystem::path names;
    std::filesystem::path catalog;
    std::filesystem::path validation;
    std::filesystem::path columns;
};

// Writes a seeded synthetic export (non-default column names) with one
// planted term per gender, plus every side file a run needs.
PlantFiles write_plant_fixture(const std::filesystem::path& dir, const PlantSpec& spec = {});

// Unique directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag = "gterms");
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Every regular file under `dir`, keyed by relative path, with its bytes.
std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& dir);

}  // namespace gterms::testkit
