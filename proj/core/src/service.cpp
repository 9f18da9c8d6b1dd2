#include "logicdec/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "json.hpp"
#include "logicdec/decision.hpp"
#include "logicdec/error.hpp"
#include "logicdec/prover.hpp"

namespace logicdec {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxLine = 16u << 20;

TokenId token_of(const json& v, const FactBase& facts) {
  if (v.is_number_unsigned() || v.is_number_integer()) {
    const auto id = v.get<std::int64_t>();
    if (id < 0 || static_cast<std::uint64_t>(id) >= facts.vocab_size()) {
      throw DimensionError("token id " + std::to_string(id) + " outside the vocabulary");
    }
    return static_cast<TokenId>(id);
  }
  if (v.is_string()) {
    const std::string w = v.get<std::string>();
    if (auto id = align_with_lemma(w, facts.vocab, facts.policy)) return *id;
    throw Error("word '" + w + "' does not align to a token");
  }
  throw Error("set members must be token ids or words");
}

std::vector<TokenId> token_list(const json& v, const FactBase& facts) {
  if (!v.is_array()) throw Error("expected a list of tokens");
  std::vector<TokenId> out;
  out.reserve(v.size());
  for (const json& e : v) out.push_back(token_of(e, facts));
  return out;
}

std::vector<double> number_list(const json& v, const char* field) {
  if (!v.is_array()) throw Error(std::string("field '") + field + "' must be a list of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) throw Error(std::string("field '") + field + "' must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

json answer(const json& req, const FactBase& facts, const RuleProgram& program) {
  if (!req.is_object()) throw Error("request must be a JSON object");
  if (!req.contains("op") || !req["op"].is_string()) throw Error("missing string field 'op'");
  const std::string op = req["op"].get<std::string>();
  json out = json::object();
  if (op == "prove") {
    if (!req.contains("rule") || !req["rule"].is_string()) throw Error("missing string field 'rule'");
    Domain domain = Domain::vocabulary();
    if (req.contains("domain")) {
      const json& d = req["domain"];
      if (d.is_string()) {
        if (d.get<std::string>() != "vocab") throw Error("domain must be \"vocab\" or a list of tokens");
      } else {
        domain = Domain::custom(token_list(d, facts));
      }
    }
    EvalContext ctx(facts);
    if (req.contains("ctx")) {
      const json& c = req["ctx"];
      if (!c.is_object()) throw Error("field 'ctx' must be an object");
      for (auto it = c.begin(); it != c.end(); ++it) ctx.sets[it.key()] = token_list(it.value(), facts);
    }
    const TruthVector truth = prove(program, req["rule"].get<std::string>(), domain, ctx);
    out["truth"] = std::vector<double>(truth.values().begin(), truth.values().end());
  } else if (op == "decide") {
    if (!req.contains("p") || !req.contains("truth") || !req.contains("alpha")) {
      throw Error("decide needs fields 'p', 'truth' and 'alpha'");
    }
    if (!req["alpha"].is_number()) throw Error("field 'alpha' must be a number");
    const Distribution p(number_list(req["p"], "p"));
    const TruthVector truth(number_list(req["truth"], "truth"));
    const Distribution shifted = decide(p, truth, req["alpha"].get<double>());
    out["p_shifted"] = std::vector<double>(shifted.values().begin(), shifted.values().end());
  } else {
    throw Error("unknown op '" + op + "'");
  }
  return out;
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

std::string handle_request(std::string_view line, const FactBase& facts, const RuleProgram& program) {
  json req;
  json reply;
  try {
    req = json::parse(line);
  } catch (const json::exception& e) {
    reply["error"] = std::string("malformed JSON: ") + e.what();
    return reply.dump();
  }
  try {
    reply = answer(req, facts, program);
  } catch (const std::exception& e) {
    reply = json::object();
    reply["error"] = e.what();
  }
  if (req.is_object() && req.contains("id")) reply["id"] = req["id"];
  return reply.dump();
}

LogicServer::LogicServer(const FactBase& facts, const RuleProgram& program) : facts_(facts), program_(program) {}

LogicServer::~LogicServer() { stop(); }

void LogicServer::bind(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no usable address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      sockaddr_storage addr{};
      socklen_t len = sizeof addr;
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
      port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                               : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
      listen_fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) throw Error("cannot bind " + host + ":" + service + ": " + last_error);
}

void LogicServer::serve() {
  if (listen_fd_ < 0) throw Error("server is not bound");
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard<std::mutex> lock(mutex_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void LogicServer::start() {
  acceptor_ = std::thread([this] { serve(); });
}

void LogicServer::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void LogicServer::handle_connection(int fd) {
  std::string buffer;
  char chunk[65536];
  bool open = true;
  while (open) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(buffer.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
      if (!send_all(fd, handle_request(line, facts_, program_) + "\n")) {
        open = false;
        break;
      }
    }
    buffer.erase(0, start);
    if (buffer.size() > kMaxLine) {
      send_all(fd, "{\"error\":\"request line too long\"}\n");
      break;
    }
  }
  std::lock_guard<std::mutex> lock(mutex_);
  std::erase(client_fds_, fd);
  ::close(fd);
}

}  // namespace logicdec
