// Copyright 2026 The nlidebias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nlidebias/prompts.h"

#include <algorithm>
#include <cctype>

#include "nlidebias/util.h"
#include "prompt_templates.inc"

namespace nlidebias {

std::string_view GenerationTemplate() { return kGenerationTemplate; }
std::string_view JudgeTemplate() { return kJudgeTemplate; }

std::string RenderTemplate(
    std::string_view tmpl,
    std::initializer_list<std::pair<std::string_view, std::string_view>>
        substitutions) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      bool replaced = false;
      for (const auto& [placeholder, value] : substitutions) {
        if (tmpl.substr(i).starts_with(placeholder)) {
          out.append(value);
          i += placeholder.size();
          replaced = true;
          break;
        }
      }
      if (replaced) continue;
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

std::string RenderGenerationPrompt(const GenerationTask& task) {
  return RenderTemplate(
      GenerationTemplate(),
      {{"{PREMISE}", task.anchor.premise},
       {"{HYPOTHESIS}", task.anchor.hypothesis},
       {"{TARGET_LABEL}", LabelDisplayName(task.target_label)}});
}

std::string RenderJudgePrompt(const JudgeCandidate& candidate) {
  if (Trim(candidate.new_premise).empty()) {
    throw InputError("judge prompt requires a new premise");
  }
  return RenderTemplate(
      JudgeTemplate(),
      {{"{PREMISE}", candidate.premise},
       {"{HYPOTHESIS}", candidate.hypothesis},
       {"{NEW_PREMISE}", candidate.new_premise},
       {"{TARGET_LABEL}", LabelDisplayName(candidate.target_label)}});
}

namespace {

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string ParseGenerationResponse(std::string_view text,
                                    std::string_view original_premise) {
  constexpr std::string_view kPrefix = "New Premise:";
  std::string_view s = Trim(text);
  if (s.size() >= kPrefix.size() &&
      EqualsIgnoreCase(s.substr(0, kPrefix.size()), kPrefix)) {
    s = Trim(s.substr(kPrefix.size()));
  }
  if (s.empty()) {
    throw ResponseError(ResponseError::Kind::kEmpty, "empty generation");
  }
  if (s == Trim(original_premise)) {
    throw ResponseError(ResponseError::Kind::kNoPerturbation, "no perturbation");
  }
  return std::string(s);
}

JudgeVerdict ParseJudgeVerdict(std::string_view text, std::string judge_id) {
  std::string_view s = Trim(text);
  const auto bar = s.find('|');
  if (bar == std::string_view::npos) {
    throw ResponseError(ResponseError::Kind::kMalformedVerdict,
                        "verdict has no '|' separator");
  }
  std::string_view flag = Trim(s.substr(0, bar));
  std::string_view reasoning = Trim(s.substr(bar + 1));
  JudgeVerdict v;
  v.judge_id = std::move(judge_id);
  if (EqualsIgnoreCase(flag, "true")) {
    v.valid = true;
  } else if (EqualsIgnoreCase(flag, "false")) {
    v.valid = false;
  } else {
    throw ResponseError(ResponseError::Kind::kMalformedVerdict,
                        "verdict flag is not true/false: '" +
                            std::string(flag) + "'");
  }
  if (reasoning.empty()) {
    throw ResponseError(ResponseError::Kind::kMalformedVerdict,
                        "verdict has empty reasoning");
  }
  v.reasoning = std::string(reasoning);
  return v;
}

}  // namespace nlidebias
