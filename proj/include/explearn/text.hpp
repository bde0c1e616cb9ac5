#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace explearn::text {

std::string to_lower(std::string_view s);

/// Lowercase alphanumeric tokens with a short stop-word list removed and a
/// plural `s` folded, so "Contacts" and "contact" meet.
std::vector<std::string> tokenize(std::string_view s);

/// Trims whitespace and the punctuation that commonly hugs entities in
/// spoken commands (commas, quotes, full stops at the end).
std::string trim_punctuation(std::string_view s);

bool icontains(std::string_view haystack, std::string_view needle);

/// Replaces `{name}` and `{name|fallback}` slots. Unknown names without a
/// fallback become empty.
std::string fill_slots(std::string_view templ, const std::map<std::string, std::string>& primary,
                       const std::map<std::string, std::string>& secondary = {});

std::uint64_t fnv1a64(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace explearn::text
