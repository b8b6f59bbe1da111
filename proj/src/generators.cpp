#include "httplib.h"

#include "ratg/generators.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace ratg {

std::string unescape_token(std::string_view line) {
  std::string out;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\') {
      out.push_back(line[i]);
      continue;
    }
    if (i + 1 == line.size()) throw ArgumentError("dangling backslash");
    switch (line[++i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case 's': out.push_back(' '); break;
      case '\\': out.push_back('\\'); break;
      case '@': out.push_back('@'); break;
      default: throw ArgumentError(std::string("unknown escape \\") + line[i]);
    }
  }
  return out;
}

std::string escape_token(std::string_view token) {
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    const char c = token[i];
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      case ' ': out += "\\s"; break;
      case '@':
        out += i == 0 ? "\\@" : "@";
        break;
      default: out.push_back(c);
    }
  }
  return out;
}

ScriptedGenerator::ScriptedGenerator(std::vector<std::string> tokens) {
  segments_.push_back(Segment{std::nullopt, std::move(tokens), {}});
}

ScriptedGenerator ScriptedGenerator::parse(std::string_view script) {
  ScriptedGenerator g;
  g.segments_.emplace_back();
  enum { plain, then_list, else_list } state = plain;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= script.size()) {
    auto eol = script.find('\n', pos);
    if (eol == std::string_view::npos) eol = script.size();
    std::string_view line = script.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw ArgumentError("token script line " + std::to_string(line_no) + ": " + what);
    };
    if (line.front() == '@') {
      if (line.substr(0, 6) == "@when ") {
        if (state != plain) fail("nested @when");
        try {
          g.segments_.push_back(Segment{unescape_token(line.substr(6)), {}, {}});
        } catch (const ArgumentError& e) {
          fail(e.what());
        }
        state = then_list;
      } else if (line == "@otherwise") {
        if (state != then_list) fail("@otherwise outside @when");
        state = else_list;
      } else if (line == "@end") {
        if (state == plain) fail("@end without @when");
        g.segments_.emplace_back();
        state = plain;
      } else {
        fail("unknown directive " + std::string(line));
      }
      continue;
    }
    std::string token;
    try {
      token = unescape_token(line);
    } catch (const ArgumentError& e) {
      fail(e.what());
    }
    auto& seg = g.segments_.back();
    (state == else_list ? seg.otherwise : seg.tokens).push_back(std::move(token));
  }
  if (state != plain) throw ArgumentError("token script: unterminated @when block");
  return g;
}

ScriptedGenerator ScriptedGenerator::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read token script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> ScriptedGenerator::next_token(const std::string& prompt) {
  prompts_.push_back(prompt);
  while (segment_ < segments_.size()) {
    const auto& seg = segments_[segment_];
    if (seg.condition && !chosen_) {
      chosen_ = prompt.find(*seg.condition) != std::string::npos;
      branches_.push_back(*chosen_);
    }
    const auto& list = (!seg.condition || *chosen_) ? seg.tokens : seg.otherwise;
    if (index_ < list.size()) return list[index_++];
    ++segment_;
    index_ = 0;
    chosen_.reset();
  }
  return std::nullopt;
}

RemoteGenerator::RemoteGenerator(RemoteGeneratorOptions options) : options_(std::move(options)) {
  const auto& url = options_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("llm_endpoint", "expected http(s)://host/path");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("llm_endpoint", "unsupported scheme " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  base_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (base_.size() <= scheme_end + 3) throw ConfigError("llm_endpoint", "missing host");
}

std::optional<std::string> RemoteGenerator::next_token(const std::string& prompt) {
  using nlohmann::json;
  const json body = {{"prompt", prompt}, {"max_new_tokens", 1}, {"temperature", options_.temperature}};
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!options_.token.empty()) headers.emplace("Authorization", "Bearer " + options_.token);

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.retry_delay * attempt);
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    ++requests_;
    const auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw GeneratorError("generator endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error&) {
      throw GeneratorError("generator endpoint returned non-JSON body");
    }
    if (reply.value("stop", false) || reply.value("done", false)) return std::nullopt;
    std::string token;
    if (reply.contains("token") && reply["token"].is_string()) {
      token = reply["token"].get<std::string>();
    } else if (reply.contains("content") && reply["content"].is_string()) {
      token = reply["content"].get<std::string>();
    } else if (reply.contains("choices") && reply["choices"].is_array() && !reply["choices"].empty() &&
               reply["choices"][0].contains("text")) {
      token = reply["choices"][0]["text"].get<std::string>();
    } else {
      throw GeneratorError("generator reply carries no token: " + res->body.substr(0, 200));
    }
    if (token.empty()) return std::nullopt;
    return token;
  }
  throw GeneratorError("generator endpoint failed after " + std::to_string(options_.max_retries) +
                       " retries: " + last_error);
}

}  // namespace ratg
