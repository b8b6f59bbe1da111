#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "ratg/lsp/protocol.hpp"
#include "ratg/process.hpp"

namespace ratg::lsp {

/// JSON-RPC 2.0 over a child's stdio. Requests from the server are answered
/// inline: `workspace/configuration` gets one null per item, anything else a
/// null result.
class Connection {
 public:
  explicit Connection(Subprocess process) : process_(std::move(process)) {}

  /// Sends a request and waits for its response. Throws LspError with
  /// request_timeout, server_error (an error response), server_exited or
  /// malformed_response.
  json request(const std::string& method, const json& params, std::chrono::milliseconds timeout);
  void notify(const std::string& method, const json& params);

  int next_request_id() const noexcept { return next_id_; }
  const std::vector<int>& issued_ids() const noexcept { return issued_; }
  /// Methods of the server-to-client requests answered so far.
  const std::vector<std::string>& answered_server_requests() const noexcept { return answered_; }
  Subprocess& process() noexcept { return process_; }

 private:
  void send(const json& message);
  void answer(const json& message);

  Subprocess process_;
  MessageReader reader_;
  int next_id_ = 1;
  std::vector<int> issued_;
  std::vector<std::string> answered_;
};

}  // namespace ratg::lsp
