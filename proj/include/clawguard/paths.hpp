#pragma once

#include <string>
#include <string_view>

namespace clawguard {

// Lexical normalization: "~" expands to `home`, "." and ".." segments
// collapse, duplicate slashes drop. ".." never climbs above an absolute
// root. Idempotent.
std::string normalize_path(std::string_view path, std::string_view home);

// Glob over separator-delimited segments: "*" matches within one segment,
// "**" matches any number of segments (including zero). Used with '/' for
// paths and '.' for hosts.
bool glob_match(std::string_view pattern, std::string_view text, char separator = '/');

bool host_match(std::string_view pattern, std::string_view host);

// Host part of a URL ("https://a.b/c" -> "a.b"); plain hosts pass through.
std::string url_host(std::string_view url);

}  // namespace clawguard
