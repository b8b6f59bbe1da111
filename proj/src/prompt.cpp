#include "ratg/prompt.hpp"

#include "ratg/text.hpp"

namespace ratg {

std::string initial_snippet(std::string_view name) {
  if (!text::is_identifier(name)) {
    throw ArgumentError("not a Go identifier: '" + std::string(name) + "'");
  }
  return "func Test" + std::string(name) + "(t *testing.T) {";
}

std::string_view focal_header(FocalKind kind) {
  return kind == FocalKind::method ? "### METHOD UNDER TEST" : "### FUNCTION UNDER TEST";
}

std::string build_prompt(const Prompt& prompt) {
  std::string out = prompt.task_description;
  out += "\n\n";
  if (!prompt.precise_context.empty()) {
    out += prompt.precise_context;
    out += "\n\n";
  }
  out += focal_header(prompt.focal_kind);
  out += '\n';
  out += prompt.focal_text;
  out += "\n\n";
  out += prompt.test_snippet;
  return out;
}

}  // namespace ratg
