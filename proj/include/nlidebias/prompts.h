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

#ifndef NLIDEBIAS_PROMPTS_H_
#define NLIDEBIAS_PROMPTS_H_

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

#include "nlidebias/corpus.h"
#include "nlidebias/error.h"

namespace nlidebias {

// Prompt templates, compiled in from assets/prompts/*.txt. Placeholders:
// {PREMISE} {HYPOTHESIS} {TARGET_LABEL} {NEW_PREMISE}.
std::string_view GenerationTemplate();
std::string_view JudgeTemplate();

// Single left-to-right pass over `tmpl`: each exact placeholder is replaced
// by its value, everything else (including braces inside values) is copied
// verbatim. Values are never rescanned.
std::string RenderTemplate(
    std::string_view tmpl,
    std::initializer_list<std::pair<std::string_view, std::string_view>>
        substitutions);

struct GenerationTask {
  NliExample anchor;
  Label target_label = Label::kEntailment;
  int attempt = 0;
};

std::string RenderGenerationPrompt(const GenerationTask& task);

struct JudgeCandidate {
  std::string premise;
  std::string hypothesis;
  std::string new_premise;
  Label target_label = Label::kEntailment;
};

// Throws InputError when new_premise is empty.
std::string RenderJudgePrompt(const JudgeCandidate& candidate);

// Thrown for model output that cannot be used. All kinds are retryable within
// the configured budget.
class ResponseError : public Error {
 public:
  enum class Kind { kEmpty, kNoPerturbation, kMalformedVerdict };
  ResponseError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Trims whitespace and a leading "New Premise:" echo. Throws ResponseError
// kEmpty for blank output and kNoPerturbation when the result equals the
// original premise.
std::string ParseGenerationResponse(std::string_view text,
                                    std::string_view original_premise);

struct JudgeVerdict {
  std::string judge_id;
  bool valid = false;
  std::string reasoning;

  friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

// "<valid>|<reasoning>": split at the first '|', valid is true/false in any
// case, reasoning must be non-empty after trimming. Throws ResponseError
// kMalformedVerdict otherwise.
JudgeVerdict ParseJudgeVerdict(std::string_view text,
                               std::string judge_id = {});

}  // namespace nlidebias

#endif  // NLIDEBIAS_PROMPTS_H_
