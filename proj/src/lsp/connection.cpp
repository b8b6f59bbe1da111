#include "ratg/lsp/connection.hpp"

namespace ratg::lsp {

void Connection::send(const json& message) {
  if (!process_.write_all(frame(message))) {
    throw LspError(LspErrorKind::server_exited, "cannot write to server");
  }
}

void Connection::notify(const std::string& method, const json& params) {
  send({{"jsonrpc", "2.0"}, {"method", method}, {"params", params}});
}

void Connection::answer(const json& message) {
  const std::string method = message.value("method", "");
  json result = nullptr;
  if (method == "workspace/configuration") {
    result = json::array();
    if (message.contains("params") && message["params"].contains("items")) {
      for (std::size_t i = 0; i < message["params"]["items"].size(); ++i) result.push_back(nullptr);
    }
  }
  answered_.push_back(method);
  send({{"jsonrpc", "2.0"}, {"id", message["id"]}, {"result", result}});
}

json Connection::request(const std::string& method, const json& params, std::chrono::milliseconds timeout) {
  const int id = next_id_++;
  issued_.push_back(id);
  send({{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}});
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    while (auto message = reader_.next()) {
      if (message->contains("method")) {
        if (message->contains("id")) answer(*message);
        continue;
      }
      if (!message->contains("id")) {
        throw LspError(LspErrorKind::malformed_response, "message without id or method");
      }
      if (!(*message)["id"].is_number_integer() || (*message)["id"].get<int>() != id) continue;
      if (message->contains("error")) {
        const auto& err = (*message)["error"];
        throw LspError(LspErrorKind::server_error,
                       method + ": " + (err.is_object() ? err.value("message", err.dump()) : err.dump()));
      }
      if (!message->contains("result")) {
        throw LspError(LspErrorKind::malformed_response, method + ": response has neither result nor error");
      }
      return (*message)["result"];
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      throw LspError(LspErrorKind::request_timeout, method + " (id " + std::to_string(id) + ")");
    }
    auto chunk = process_.read_some(remaining);
    if (!chunk) throw LspError(LspErrorKind::request_timeout, method + " (id " + std::to_string(id) + ")");
    if (chunk->empty()) throw LspError(LspErrorKind::server_exited, "server closed its output during " + method);
    reader_.feed(*chunk);
  }
}

}  // namespace ratg::lsp
