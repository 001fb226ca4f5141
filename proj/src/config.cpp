#include "gterms/config.hpp"

#include "gterms/csv.hpp"
#include "gterms/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace gterms {

namespace {

struct KeyInfo {
    const char* section;
    const char* key;
};

constexpr KeyInfo kKeys[] = {
    {"inputs", "corpus"},           {"inputs", "names"},          {"inputs", "validation"},
    {"inputs", "catalog"},          {"inputs", "stoplist"},       {"inputs", "columns"},
    {"thresholds", "name_threshold"}, {"thresholds", "min_field_size"}, {"thresholds", "top_n"},
    {"thresholds", "rank_n"},       {"thresholds", "k"},          {"thresholds", "min_fields"},
    {"thresholds", "min_share"},    {"thresholds", "alpha"},      {"thresholds", "kwic_n"},
    {"thresholds", "overlap"},      {"analysis", "policy"},       {"analysis", "deplural"},
    {"analysis", "seed"},           {"analysis", "countries"},    {"factors", "male_factor"},
    {"factors", "female_factor"},   {"output", "output_dir"},
};

template <class T>
T parse_number(std::string_view key, const std::string& raw) {
    const std::string s = csv::trim(raw);
    T value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (s.empty() || ec != std::errc{} || ptr != end)
        throw ConfigError("invalid value for " + std::string(key) + ": '" + raw + "'");
    return value;
}

std::filesystem::path resolve(const std::string& value, const std::filesystem::path& base) {
    const std::string v = csv::trim(value);
    if (v.empty()) return {};
    std::filesystem::path p(v);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

void check(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> out = [] {
        std::vector<std::string> v;
        for (const auto& k : kKeys) v.emplace_back(k.key);
        return v;
    }();
    return out;
}

void RunConfig::set(std::string_view key, const std::string& value, const std::filesystem::path& base) {
    if (key == "corpus") corpus = resolve(value, base);
    else if (key == "names") names = resolve(value, base);
    else if (key == "validation") validation = resolve(value, base);
    else if (key == "catalog") catalog = resolve(value, base);
    else if (key == "stoplist") stoplist = resolve(value, base);
    else if (key == "columns") columns = resolve(value, base);
    else if (key == "name_threshold") name_threshold = parse_number<double>(key, value);
    else if (key == "min_field_size") min_field_size = parse_number<std::size_t>(key, value);
    else if (key == "top_n") top_n = parse_number<std::size_t>(key, value);
    else if (key == "rank_n") rank_n = parse_number<std::size_t>(key, value);
    else if (key == "k") k = parse_number<std::size_t>(key, value);
    else if (key == "min_fields") min_fields = parse_number<std::size_t>(key, value);
    else if (key == "min_share") min_share = parse_number<double>(key, value);
    else if (key == "alpha") alpha = parse_number<double>(key, value);
    else if (key == "kwic_n") kwic_n = parse_number<std::size_t>(key, value);
    else if (key == "overlap") overlap = parse_number<double>(key, value);
    else if (key == "policy") policy = stats::parse_policy(csv::trim(value));
    else if (key == "deplural") deplural = textprep::parse_deplural(csv::trim(value));
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "countries") countries = csv::split(value, ',');
    else if (key == "male_factor") male_factor = parse_number<double>(key, value);
    else if (key == "female_factor") female_factor = parse_number<double>(key, value);
    else if (key == "output_dir") output_dir = resolve(value, base);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig RunConfig::load(const std::filesystem::path& ini) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(ini.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        if (!std::filesystem::exists(ini)) throw IoError("cannot read config " + ini.string());
        throw ConfigError("malformed config " + ini.string() + ": " + e.message());
    }
    const auto base = ini.parent_path();
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        for (const auto& [key, node] : body) {
            const auto* it = std::find_if(std::begin(kKeys), std::end(kKeys), [&](const KeyInfo& k) {
                return section == k.section && (key == k.key || (section == "output" && key == "dir"));
            });
            if (it == std::end(kKeys))
                throw ConfigError(ini.string() + ": unknown key [" + section + "] " + key);
            cfg.set(it->key, node.data(), base);
        }
    }
    return cfg;
}

void RunConfig::apply_env() {
    for (const auto& key : keys()) {
        std::string name = "GTERMS_" + key;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(name.c_str())) set(key, v);
    }
}

void RunConfig::validate() const {
    check(!corpus.empty(), "config: corpus path is required");
    check(!names.empty(), "config: names path is required");
    check(!catalog.empty(), "config: catalog path is required");
    check(name_threshold >= 0.5 && name_threshold <= 1.0, "config: name_threshold must be in [0.5, 1]");
    check(min_field_size >= 1, "config: min_field_size must be >= 1");
    check(top_n >= 1, "config: top_n must be >= 1");
    check(rank_n >= 1 && rank_n <= top_n, "config: rank_n must be in [1, top_n]");
    check(k >= 1, "config: k must be >= 1");
    check(min_fields >= 1, "config: min_fields must be >= 1");
    check(min_share >= 0.5 && min_share <= 1.0, "config: min_share must be in [0.5, 1]");
    check(alpha > 0.0 && alpha < 1.0, "config: alpha must be in (0, 1)");
    check(kwic_n >= 1, "config: kwic_n must be >= 1");
    check(overlap >= 1.0, "config: overlap must be >= 1");
    check(male_factor.has_value() == female_factor.has_value(),
          "config: male_factor and female_factor must be given together");
    if (male_factor) check(*male_factor > 0.0 && *female_factor > 0.0, "config: correction factors must be > 0");
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["corpus"] = corpus.string();
    j["names"] = names.string();
    j["validation"] = validation.string();
    j["catalog"] = catalog.string();
    j["stoplist"] = stoplist.string();
    j["columns"] = columns.string();
    j["name_threshold"] = name_threshold;
    j["min_field_size"] = min_field_size;
    j["top_n"] = top_n;
    j["rank_n"] = rank_n;
    j["k"] = k;
    j["min_fields"] = min_fields;
    j["min_share"] = min_share;
    j["alpha"] = alpha;
    j["kwic_n"] = kwic_n;
    j["overlap"] = overlap;
    j["policy"] = stats::policy_name(policy);
    j["deplural"] = textprep::deplural_name(deplural);
    j["seed"] = seed;
    j["countries"] = countries;
    j["male_factor"] = male_factor ? nlohmann::ordered_json(*male_factor) : nlohmann::ordered_json();
    j["female_factor"] = female_factor ? nlohmann::ordered_json(*female_factor) : nlohmann::ordered_json();
    j["output_dir"] = output_dir.string();
    return j;
}

}  // namespace gterms
