#pragma once

#include <string>
#include <string_view>

#include "ratg/focal.hpp"

namespace ratg {

inline constexpr std::string_view kDefaultTaskDescription =
    "I will give you a Golang method or function, please generate a Golang unit test";

struct Prompt {
  std::string task_description{kDefaultTaskDescription};
  std::string precise_context;
  std::string focal_text;
  FocalKind focal_kind = FocalKind::function;
  std::string test_snippet;
};

/// `func Test<name>(t *testing.T) {`. Throws ArgumentError unless `name` is
/// a Go identifier.
std::string initial_snippet(std::string_view name);

/// "### METHOD UNDER TEST" or "### FUNCTION UNDER TEST".
std::string_view focal_header(FocalKind kind);

/// Task description, precise context, focal header and text, then the test
/// snippet, separated by single blank lines. An empty context contributes no
/// section. The snippet is the last content, with no trailing newline.
std::string build_prompt(const Prompt& prompt);

}  // namespace ratg
