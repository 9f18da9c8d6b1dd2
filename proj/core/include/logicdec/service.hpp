#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "logicdec/knowledge_base.hpp"
#include "logicdec/rule_dsl.hpp"

namespace logicdec {

/// Answers one newline-delimited JSON request:
///
///   {"op":"prove","rule":"R","domain":"vocab"|[ids],"ctx":{"C":[...],...}}
///     -> {"truth":[...]}
///   {"op":"decide","p":[...],"truth":[...],"alpha":a}
///     -> {"p_shifted":[...]}
///
/// Set members in ctx may be token ids or words (aligned like concepts).
/// An "id" field is echoed back. Any failure yields {"error":"..."}.
/// Never throws.
std::string handle_request(std::string_view line, const FactBase& facts, const RuleProgram& program);

/// TCP server speaking the protocol of handle_request, one thread per
/// connection. Facts and program must outlive the server.
class LogicServer {
 public:
  LogicServer(const FactBase& facts, const RuleProgram& program);
  ~LogicServer();
  LogicServer(const LogicServer&) = delete;
  LogicServer& operator=(const LogicServer&) = delete;

  /// Binds and listens; port 0 picks a free port. Throws Error on failure.
  void bind(const std::string& host, std::uint16_t port);
  std::uint16_t port() const { return port_; }

  /// Accepts connections until stop() is called.
  void serve();
  /// Starts serve() on a background thread.
  void start();
  /// Closes the listener and all connections and joins every thread.
  void stop();

 private:
  void handle_connection(int fd);

  const FactBase& facts_;
  const RuleProgram& program_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

}  // namespace logicdec
