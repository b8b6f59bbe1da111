#include "ratg/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace ratg {

using json = nlohmann::json;

EvalReport make_eval_report(const std::string& project, const std::vector<CompileResult>& compiled,
                            std::size_t passed, double line_coverage, const MutationSummary& mutation) {
  EvalReport r;
  r.project = project;
  r.candidates = static_cast<double>(compiled.size());
  r.compiled = static_cast<double>(std::count_if(compiled.begin(), compiled.end(), [](const CompileResult& c) {
    return c.status == CompileStatus::compiled;
  }));
  r.passed = static_cast<double>(passed);
  r.compile_rate = compile_rate(compiled);
  r.line_coverage = line_coverage;
  r.mutants_total = static_cast<double>(mutation.total);
  r.mutants_covered = static_cast<double>(mutation.covered());
  r.mutants_killed = static_cast<double>(mutation.killed);
  r.mutator_coverage = mutation.mutator_coverage();
  return r;
}

namespace {

std::string count_cell(double v) {
  if (std::floor(v) == v) return fmt::format("{}", static_cast<long long>(v));
  return fmt::format("{:.2f}", v);
}

std::string percent_cell(double v) { return fmt::format("{:.2f}%", v * 100.0); }

std::vector<std::string> row_cells(const EvalReport& r) {
  return {r.project,
          count_cell(r.candidates),
          count_cell(r.compiled),
          count_cell(r.passed),
          percent_cell(r.compile_rate),
          percent_cell(r.line_coverage),
          count_cell(r.mutants_total),
          count_cell(r.mutants_covered),
          count_cell(r.mutants_killed),
          percent_cell(r.mutator_coverage)};
}

}  // namespace

AggregateReport aggregate_report(const std::vector<EvalReport>& projects) {
  if (projects.empty()) throw ArgumentError("aggregate_report needs at least one project");
  AggregateReport out;
  out.projects = projects;
  auto& avg = out.average;
  avg.project = "Average";
  const double n = static_cast<double>(projects.size());
  for (const auto& p : projects) {
    avg.candidates += p.candidates / n;
    avg.compiled += p.compiled / n;
    avg.passed += p.passed / n;
    avg.compile_rate += p.compile_rate / n;
    avg.line_coverage += p.line_coverage / n;
    avg.mutants_total += p.mutants_total / n;
    avg.mutants_covered += p.mutants_covered / n;
    avg.mutants_killed += p.mutants_killed / n;
    avg.mutator_coverage += p.mutator_coverage / n;
  }

  const std::vector<std::string> header = {"Project", "Candidates", "Compiled", "Passed", "Compile Rate",
                                           "Line Coverage", "Mutants", "Covered", "Killed", "Mutator Coverage"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : projects) rows.push_back(row_cells(p));
  rows.push_back(row_cells(avg));
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  auto render = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) line += "  ";
      line += c == 0 ? fmt::format("{:<{}}", cells[c], width[c]) : fmt::format("{:>{}}", cells[c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };
  std::string rule;
  for (std::size_t c = 0; c < width.size(); ++c) rule += (c ? "  " : "") + std::string(width[c], '-');
  out.table = render(header) + rule + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i + 1 == rows.size()) out.table += rule + "\n";
    out.table += render(rows[i]);
  }

  json list = json::array();
  for (const auto& p : projects) list.push_back(to_json(p));
  out.document = {{"projects", list}, {"average", to_json(avg)}};
  return out;
}

json to_json(const EvalReport& r) {
  return {{"project", r.project},
          {"candidates", r.candidates},
          {"compiled", r.compiled},
          {"passed", r.passed},
          {"compile_rate", r.compile_rate},
          {"line_coverage", r.line_coverage},
          {"mutants_total", r.mutants_total},
          {"mutants_covered", r.mutants_covered},
          {"mutants_killed", r.mutants_killed},
          {"mutator_coverage", r.mutator_coverage}};
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  r.project = j.at("project").get<std::string>();
  r.candidates = j.at("candidates").get<double>();
  r.compiled = j.at("compiled").get<double>();
  r.passed = j.at("passed").get<double>();
  r.compile_rate = j.at("compile_rate").get<double>();
  r.line_coverage = j.at("line_coverage").get<double>();
  r.mutants_total = j.at("mutants_total").get<double>();
  r.mutants_covered = j.at("mutants_covered").get<double>();
  r.mutants_killed = j.at("mutants_killed").get<double>();
  r.mutator_coverage = j.at("mutator_coverage").get<double>();
  return r;
}

}  // namespace ratg
