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

#ifndef TAP_WIKITEXT_H_
#define TAP_WIKITEXT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tap {

struct Attribute {
  std::string name;
  std::string value;

  friend bool operator==(const Attribute &, const Attribute &) = default;
};

using Infobox = std::vector<Attribute>;

// Supported wikitext subset: templates "{{name|arg|key=value}}", links
// "[[target]]" / "[[target|label]]", bold/italic quotes, HTML comments and
// <ref> tags. Everything else is kept as plain text.

// Named parameters of the first top-level template whose name starts with
// "Infobox" (any case), in source order, with cleaned values. Returns
// nullopt when there is no such template or template braces are unbalanced.
std::optional<Infobox> ParseInfobox(std::string_view wikitext);

// First non-empty paragraph after the leading templates, cleaned, with
// bold/italic quote runs removed. Empty when there is none.
std::string ExtractLead(std::string_view wikitext);

// Resolves links, replaces templates by their space-joined positional
// arguments, drops comments and refs, collapses whitespace.
std::string CleanWikitext(std::string_view text);

// "name[value] name[value] ..."; backslash and brackets inside names and
// values are escaped with a backslash. Throws InvalidArgument when empty.
std::string LinearizeInfobox(const Infobox &attributes);

// Inverse of LinearizeInfobox. Throws ParseError on malformed input.
Infobox ParseLinearizedInfobox(std::string_view text);

}  // namespace tap

#endif  // TAP_WIKITEXT_H_
