#include "explearn/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace explearn::text {
namespace {

constexpr std::array<std::string_view, 23> kStopWords{
    "a", "an", "the", "to", "from", "of", "for", "in", "and", "or", "is",
    "are", "be", "it", "this", "that", "with", "by", "at", "as", "into", "my", "do",
};

bool is_stop_word(std::string_view token) {
    return std::find(kStopWords.begin(), kStopWords.end(), token) != kStopWords.end();
}

std::string fold_plural(std::string token) {
    if (token.size() > 3 && token.back() == 's' && token[token.size() - 2] != 's' &&
        std::isalpha(static_cast<unsigned char>(token[token.size() - 2]))) {
        token.pop_back();
    }
    return token;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) {
            if (!is_stop_word(current)) {
                tokens.push_back(fold_plural(std::move(current)));
            }
            current.clear();
        }
    };
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::string trim_punctuation(std::string_view s) {
    const auto strip = [](unsigned char c) {
        return std::isspace(c) || c == ',' || c == ';' || c == ':' || c == '"' || c == '\'' || c == '!' ||
               c == '?' || c == '.';
    };
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && strip(static_cast<unsigned char>(s[begin]))) {
        ++begin;
    }
    while (end > begin && strip(static_cast<unsigned char>(s[end - 1]))) {
        --end;
    }
    return std::string(s.substr(begin, end - begin));
}

bool icontains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) {
        return true;
    }
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::string fill_slots(std::string_view templ, const std::map<std::string, std::string>& primary,
                       const std::map<std::string, std::string>& secondary) {
    std::string out;
    std::size_t i = 0;
    while (i < templ.size()) {
        if (templ[i] != '{') {
            out += templ[i++];
            continue;
        }
        const auto close = templ.find('}', i);
        if (close == std::string_view::npos) {
            out += templ.substr(i);
            break;
        }
        const auto body = templ.substr(i + 1, close - i - 1);
        const auto bar = body.find('|');
        const std::string name(body.substr(0, bar));
        const auto lookup = [&](const std::map<std::string, std::string>& m) -> const std::string* {
            const auto it = m.find(name);
            return it != m.end() && !it->second.empty() ? &it->second : nullptr;
        };
        if (const auto* v = lookup(primary)) {
            out += *v;
        } else if (const auto* v2 = lookup(secondary)) {
            out += *v2;
        } else if (bar != std::string_view::npos) {
            out += body.substr(bar + 1);
        }
        i = close + 1;
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

}  // namespace explearn::text
