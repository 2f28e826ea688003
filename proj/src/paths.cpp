#include "clawguard/paths.hpp"

#include <vector>

#include "clawguard/common.hpp"

namespace clawguard {
namespace {

std::vector<std::string> split_segments(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// '*' matches any run of characters within one segment.
bool segment_match(std::string_view pat, std::string_view txt) {
  std::size_t p = 0, t = 0, star_p = std::string_view::npos, star_t = 0;
  while (t < txt.size()) {
    if (p < pat.size() && (pat[p] == txt[t])) {
      ++p;
      ++t;
    } else if (p < pat.size() && pat[p] == '*') {
      star_p = p++;
      star_t = t;
    } else if (star_p != std::string_view::npos) {
      p = star_p + 1;
      t = ++star_t;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

bool match_segments(const std::vector<std::string>& pat, std::size_t pi,
                    const std::vector<std::string>& txt, std::size_t ti) {
  if (pi == pat.size()) return ti == txt.size();
  if (pat[pi] == "**") {
    for (std::size_t skip = 0; ti + skip <= txt.size(); ++skip) {
      if (match_segments(pat, pi + 1, txt, ti + skip)) return true;
    }
    return false;
  }
  if (ti == txt.size()) return false;
  if (!segment_match(pat[pi], txt[ti])) return false;
  return match_segments(pat, pi + 1, txt, ti + 1);
}

}  // namespace

std::string normalize_path(std::string_view path, std::string_view home) {
  std::string expanded;
  if (path == "~") {
    expanded = std::string(home);
  } else if (path.substr(0, 2) == "~/") {
    expanded = std::string(home) + std::string(path.substr(1));
  } else {
    expanded = std::string(path);
  }

  const bool absolute = !expanded.empty() && expanded.front() == '/';
  std::vector<std::string> stack;
  for (auto& seg : split_segments(expanded, '/')) {
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (!stack.empty() && stack.back() != "..") {
        stack.pop_back();
      } else if (!absolute) {
        stack.push_back("..");
      }
      // absolute: ".." at the root clamps
      continue;
    }
    stack.push_back(std::move(seg));
  }

  std::string out = absolute ? "/" : "";
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i > 0) out.push_back('/');
    out += stack[i];
  }
  if (out.empty()) out = ".";
  return out;
}

bool glob_match(std::string_view pattern, std::string_view text, char separator) {
  if (pattern == "**") return true;
  return match_segments(split_segments(pattern, separator), 0,
                        split_segments(text, separator), 0);
}

bool host_match(std::string_view pattern, std::string_view host) {
  return glob_match(to_lower(pattern), to_lower(host), '.');
}

std::string url_host(std::string_view url) {
  std::string_view rest = url;
  const auto scheme = rest.find("://");
  if (scheme != std::string_view::npos) rest = rest.substr(scheme + 3);
  const auto slash = rest.find_first_of("/?#");
  if (slash != std::string_view::npos) rest = rest.substr(0, slash);
  const auto at = rest.find('@');
  if (at != std::string_view::npos) rest = rest.substr(at + 1);
  const auto colon = rest.find(':');
  if (colon != std::string_view::npos) rest = rest.substr(0, colon);
  return to_lower(rest);
}

}  // namespace clawguard
