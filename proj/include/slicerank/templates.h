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

#ifndef SLICERANK_TEMPLATES_H_
#define SLICERANK_TEMPLATES_H_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace slicerank {

using TemplateVars = std::map<std::string, std::string>;

// Ids of the compiled-in prompt templates (file basenames under
// assets/templates), sorted.
std::vector<std::string> TemplateIds();

// Throws NotFoundError for an unknown id.
const std::string& TemplateText(std::string_view id);

// "{name}" tokens where name is [a-z0-9_]+. JSON braces in templates are not
// placeholders.
std::set<std::string> Placeholders(std::string_view text);

// Substitutes every placeholder. Throws ValidationError naming the first
// placeholder without a value. Extra variables are ignored.
std::string RenderTemplate(std::string_view text, const TemplateVars& vars);

}  // namespace slicerank

#endif  // SLICERANK_TEMPLATES_H_
