#pragma once

#include "gterms/stats.hpp"
#include "gterms/textprep.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gterms {

// Everything a pipeline run depends on. Keys are shared by the INI file
// (grouped in sections), GTERMS_<KEY> environment overrides and CLI flags.
struct RunConfig {
    // [inputs]
    std::filesystem::path corpus;
    std::filesystem::path names;
    std::filesystem::path validation;  // optional
    std::filesystem::path catalog;
    std::filesystem::path stoplist;    // optional
    std::filesystem::path columns;     // optional column mapping

    // [thresholds]
    double name_threshold = 0.90;
    std::size_t min_field_size = 50;
    std::size_t top_n = 1000;
    std::size_t rank_n = 100;
    std::size_t k = 20;
    std::size_t min_fields = 17;
    double min_share = 0.70;
    double alpha = 0.001;
    std::size_t kwic_n = 30;
    double overlap = 2.2;

    // [analysis]
    stats::CorrectionPolicy policy = stats::CorrectionPolicy::auto_yates;
    textprep::DepluralMode deplural = textprep::DepluralMode::conditional;
    std::uint64_t seed = 0;
    std::vector<std::string> countries;

    // [factors]: used only when no validation sample is given.
    std::optional<double> male_factor;
    std::optional<double> female_factor;

    // [output]
    std::filesystem::path output_dir = "runs";

    // Relative input paths resolve against the config file's directory.
    static RunConfig load(const std::filesystem::path& ini);

    // Sets one key from its string form; throws ConfigError on an unknown key
    // or unparsable value. Relative paths resolve against `base`.
    void set(std::string_view key, const std::string& value, const std::filesystem::path& base = {});
    void apply_env();

    // Throws ConfigError when a threshold is out of range or a required input
    // is unset.
    void validate() const;

    nlohmann::ordered_json to_json() const;

    static const std::vector<std::string>& keys();
};

}  // namespace gterms
