// Copyright 2026 The SliceRank Authors.
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

#include "slicerank/templates.h"

#include "slicerank/error.h"

namespace slicerank {

namespace internal {
const std::map<std::string, std::string>& TemplateTable();
}  // namespace internal

namespace {

bool IsNameChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls fn(begin, end, name) for each placeholder; begin/end cover braces.
template <typename Fn>
void ScanPlaceholders(std::string_view text, Fn&& fn) {
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    size_t j = i + 1;
    while (j < text.size() && IsNameChar(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      fn(i, j + 1, std::string(text.substr(i + 1, j - i - 1)));
      i = j;
    }
  }
}

}  // namespace

std::vector<std::string> TemplateIds() {
  std::vector<std::string> ids;
  for (const auto& [id, text] : internal::TemplateTable()) ids.push_back(id);
  return ids;
}

const std::string& TemplateText(std::string_view id) {
  const auto& table = internal::TemplateTable();
  auto it = table.find(std::string(id));
  if (it == table.end()) throw NotFoundError("unknown template '" + std::string(id) + "'");
  return it->second;
}

std::set<std::string> Placeholders(std::string_view text) {
  std::set<std::string> names;
  ScanPlaceholders(text, [&](size_t, size_t, std::string name) { names.insert(std::move(name)); });
  return names;
}

std::string RenderTemplate(std::string_view text, const TemplateVars& vars) {
  std::string out;
  size_t copied = 0;
  ScanPlaceholders(text, [&](size_t begin, size_t end, const std::string& name) {
    auto it = vars.find(name);
    if (it == vars.end()) throw ValidationError("template placeholder {" + name + "} has no value");
    out.append(text.substr(copied, begin - copied));
    out.append(it->second);
    copied = end;
  });
  out.append(text.substr(copied));
  return out;
}

}  // namespace slicerank
