// Copyright 2026 The TAP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tap/wikitext.h"

#include <cctype>

#include "tap/error.h"

namespace tap {

namespace {

bool StartsWith(std::string_view text, size_t pos, std::string_view prefix) {
  return text.substr(pos, prefix.size()) == prefix;
}

bool StartsWithNoCase(std::string_view text, size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

size_t FindNoCase(std::string_view text, std::string_view needle, size_t from) {
  for (size_t i = from; i + needle.size() <= text.size(); ++i) {
    if (StartsWithNoCase(text, i, needle)) return i;
  }
  return std::string_view::npos;
}

std::string Trim(std::string_view text) {
  size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string CollapseWhitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

// Removes <!-- --> comments and <ref>...</ref> / <ref .../> tags.
std::string StripCommentsAndRefs(std::string_view text) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    if (StartsWith(text, i, "<!--")) {
      const size_t end = text.find("-->", i + 4);
      i = end == std::string_view::npos ? text.size() : end + 3;
      continue;
    }
    if (StartsWithNoCase(text, i, "<ref") &&
        (i + 4 < text.size() && (text[i + 4] == '>' || text[i + 4] == ' ' ||
                                 text[i + 4] == '/'))) {
      const size_t close = text.find('>', i);
      if (close == std::string_view::npos) {
        i = text.size();
        continue;
      }
      if (text[close - 1] == '/') {
        i = close + 1;
        continue;
      }
      const size_t end = FindNoCase(text, "</ref>", close + 1);
      i = end == std::string_view::npos ? text.size() : end + 6;
      continue;
    }
    out += text[i++];
  }
  return out;
}

// Index just past the "}}" matching the "{{" at pos, or npos.
size_t MatchTemplate(std::string_view text, size_t pos) {
  int depth = 0;
  size_t i = pos;
  while (i + 1 < text.size()) {
    if (text[i] == '{' && text[i + 1] == '{') {
      ++depth;
      i += 2;
    } else if (text[i] == '}' && text[i + 1] == '}') {
      --depth;
      i += 2;
      if (depth == 0) return i;
    } else {
      ++i;
    }
  }
  return std::string_view::npos;
}

// Index just past the "]]" matching the "[[" at pos, or npos.
size_t MatchLink(std::string_view text, size_t pos) {
  int depth = 0;
  size_t i = pos;
  while (i + 1 < text.size()) {
    if (text[i] == '[' && text[i + 1] == '[') {
      ++depth;
      i += 2;
    } else if (text[i] == ']' && text[i + 1] == ']') {
      --depth;
      i += 2;
      if (depth == 0) return i;
    } else {
      ++i;
    }
  }
  return std::string_view::npos;
}

bool TemplateBracesBalanced(std::string_view text) {
  int depth = 0;
  size_t i = 0;
  while (i + 1 < text.size()) {
    if (text[i] == '{' && text[i + 1] == '{') {
      ++depth;
      i += 2;
    } else if (text[i] == '}' && text[i + 1] == '}') {
      if (--depth < 0) return false;
      i += 2;
    } else {
      ++i;
    }
  }
  return depth == 0;
}

// Splits on '|' outside nested templates and links.
std::vector<std::string_view> SplitTopLevel(std::string_view text) {
  std::vector<std::string_view> parts;
  int braces = 0, brackets = 0;
  size_t start = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if (StartsWith(text, i, "{{")) {
      ++braces;
      ++i;
    } else if (StartsWith(text, i, "}}")) {
      --braces;
      ++i;
    } else if (StartsWith(text, i, "[[")) {
      ++brackets;
      ++i;
    } else if (StartsWith(text, i, "]]")) {
      --brackets;
      ++i;
    } else if (text[i] == '|' && braces == 0 && brackets == 0) {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(text.substr(start));
  return parts;
}

// Position of a top-level '=' in a template argument, or npos.
size_t NamedArgumentSplit(std::string_view arg) {
  int braces = 0, brackets = 0;
  for (size_t i = 0; i < arg.size(); ++i) {
    if (StartsWith(arg, i, "{{")) {
      ++braces;
      ++i;
    } else if (StartsWith(arg, i, "}}")) {
      --braces;
      ++i;
    } else if (StartsWith(arg, i, "[[")) {
      ++brackets;
      ++i;
    } else if (StartsWith(arg, i, "]]")) {
      --brackets;
      ++i;
    } else if (arg[i] == '=' && braces == 0 && brackets == 0) {
      return i;
    }
  }
  return std::string_view::npos;
}

std::string CleanMarkup(std::string_view text);

// "{{name|a|k=v|b}}" body (without braces) -> "a b", cleaned.
std::string FlattenTemplate(std::string_view body) {
  const std::vector<std::string_view> parts = SplitTopLevel(body);
  std::string out;
  for (size_t i = 1; i < parts.size(); ++i) {
    if (NamedArgumentSplit(parts[i]) != std::string_view::npos) continue;
    const std::string arg = CleanMarkup(parts[i]);
    if (arg.empty()) continue;
    if (!out.empty()) out += ' ';
    out += arg;
  }
  return out;
}

std::string CleanMarkup(std::string_view text) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    if (StartsWith(text, i, "{{")) {
      const size_t end = MatchTemplate(text, i);
      if (end != std::string_view::npos) {
        out += ' ';
        out += FlattenTemplate(text.substr(i + 2, end - i - 4));
        out += ' ';
        i = end;
        continue;
      }
    } else if (StartsWith(text, i, "[[")) {
      const size_t end = MatchLink(text, i);
      if (end != std::string_view::npos) {
        const std::vector<std::string_view> parts =
            SplitTopLevel(text.substr(i + 2, end - i - 4));
        out += CleanMarkup(parts.back());
        i = end;
        continue;
      }
    }
    out += text[i++];
  }
  return CollapseWhitespace(out);
}

std::string RemoveQuoteMarkup(std::string_view text) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    if (StartsWith(text, i, "''")) {
      while (i < text.size() && text[i] == '\'') ++i;
      continue;
    }
    out += text[i++];
  }
  return out;
}

void AppendEscaped(std::string &out, std::string_view text) {
  for (char c : text) {
    if (c == '\\' || c == '[' || c == ']') out += '\\';
    out += c;
  }
}

}  // namespace

std::string CleanWikitext(std::string_view text) {
  return CleanMarkup(StripCommentsAndRefs(text));
}

std::optional<Infobox> ParseInfobox(std::string_view wikitext) {
  const std::string text = StripCommentsAndRefs(wikitext);
  if (!TemplateBracesBalanced(text)) return std::nullopt;
  size_t i = 0;
  while (i < text.size()) {
    if (!StartsWith(text, i, "{{")) {
      ++i;
      continue;
    }
    const size_t end = MatchTemplate(text, i);
    if (end == std::string::npos) return std::nullopt;
    const std::string_view body = std::string_view(text).substr(i + 2, end - i - 4);
    const std::vector<std::string_view> parts = SplitTopLevel(body);
    const std::string name = Trim(parts[0]);
    if (StartsWithNoCase(name, 0, "infobox")) {
      Infobox box;
      for (size_t p = 1; p < parts.size(); ++p) {
        const size_t eq = NamedArgumentSplit(parts[p]);
        if (eq == std::string_view::npos) continue;
        std::string key = Trim(parts[p].substr(0, eq));
        if (key.empty()) continue;
        box.push_back({std::move(key), CleanMarkup(parts[p].substr(eq + 1))});
      }
      return box;
    }
    i = end;
  }
  return std::nullopt;
}

std::string ExtractLead(std::string_view wikitext) {
  const std::string text = StripCommentsAndRefs(wikitext);
  size_t i = 0;
  for (;;) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (!StartsWith(text, i, "{{")) break;
    const size_t end = MatchTemplate(text, i);
    if (end == std::string::npos) return "";
    i = end;
  }
  const std::string_view rest = std::string_view(text).substr(i);
  size_t start = 0;
  while (start <= rest.size()) {
    size_t stop = rest.find("\n\n", start);
    if (stop == std::string_view::npos) stop = rest.size();
    const std::string_view paragraph = rest.substr(start, stop - start);
    const std::string trimmed = Trim(paragraph);
    if (!trimmed.empty() && trimmed[0] != '=') {
      std::string cleaned = CollapseWhitespace(RemoveQuoteMarkup(CleanMarkup(trimmed)));
      if (!cleaned.empty()) return cleaned;
    }
    start = stop + 2;
  }
  return "";
}

std::string LinearizeInfobox(const Infobox &attributes) {
  if (attributes.empty()) throw InvalidArgument("cannot linearize an empty infobox");
  std::string out;
  for (const Attribute &a : attributes) {
    if (a.name.empty()) throw InvalidArgument("infobox attribute without a name");
    if (!out.empty()) out += ' ';
    AppendEscaped(out, a.name);
    out += '[';
    AppendEscaped(out, a.value);
    out += ']';
  }
  return out;
}

Infobox ParseLinearizedInfobox(std::string_view text) {
  Infobox box;
  size_t i = 0;
  auto read_until = [&](char stop) {
    std::string s;
    while (i < text.size() && text[i] != stop) {
      if (text[i] == '\\') {
        if (i + 1 >= text.size()) throw ParseError("dangling escape in linearized infobox");
        s += text[i + 1];
        i += 2;
      } else {
        if (text[i] == '[' || text[i] == ']') {
          if (stop == '[' || text[i] == ']') throw ParseError("unescaped bracket in linearized infobox");
        }
        s += text[i++];
      }
    }
    if (i >= text.size()) throw ParseError("unterminated unit in linearized infobox");
    ++i;
    return s;
  };
  while (i < text.size()) {
    if (!box.empty()) {
      if (text[i] != ' ') throw ParseError("expected a space between infobox units");
      ++i;
    }
    Attribute a;
    a.name = read_until('[');
    if (a.name.empty()) throw ParseError("infobox unit without a name");
    a.value = read_until(']');
    box.push_back(std::move(a));
  }
  return box;
}

}  // namespace tap
