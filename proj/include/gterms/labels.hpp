#pragma once

#include <map>
#include <string>
#include <string_view>

namespace gterms {

enum class Gender { male, female, unknown };

inline Gender other(Gender g) {
    switch (g) {
        case Gender::male: return Gender::female;
        case Gender::female: return Gender::male;
        default: return Gender::unknown;
    }
}

// "F", "M" or "U".
std::string_view gender_code(Gender g);

// Accepts F/M/U and female/male/unknown/unresolved (any case). Throws ConfigError.
Gender parse_gender(std::string_view s);

// First-author gender per article_id. Absent ids read as unknown.
class GenderLabels {
public:
    void set(const std::string& article_id, Gender g) { labels_[article_id] = g; }

    Gender get(std::string_view article_id) const {
        auto it = labels_.find(article_id);
        return it == labels_.end() ? Gender::unknown : it->second;
    }

    const std::map<std::string, Gender, std::less<>>& all() const { return labels_; }
    std::size_t size() const { return labels_.size(); }

private:
    std::map<std::string, Gender, std::less<>> labels_;
};

}  // namespace gterms
