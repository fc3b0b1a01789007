#ifndef MINPAIR_EXTERNAL_HPP_
#define MINPAIR_EXTERNAL_HPP_

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <future>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>

#include "minpair/corpus.hpp"
#include "minpair/error.hpp"
#include "minpair/scorer.hpp"

namespace minpair {

/// Transport for newline-delimited JSON requests and responses.
class ScorerChannel {
 public:
  virtual ~ScorerChannel() = default;

  /// Sends the NDJSON body and returns response lines (without newlines).
  /// Stream transports stop after `expected` non-empty lines.
  virtual std::vector<std::string> exchange(const std::string& body,
                                            std::size_t expected,
                                            std::chrono::milliseconds timeout) = 0;

  /// Drops any connection state; the next exchange starts fresh.
  virtual void reset() {}
};

/// Child process speaking the protocol on stdin/stdout. Started lazily and
/// restarted after any failure, since a desynchronised stream cannot be
/// trusted.
class SubprocessChannel : public ScorerChannel {
 public:
  explicit SubprocessChannel(std::string command) : command_(std::move(command)) {}
  ~SubprocessChannel() override { stop(); }

  SubprocessChannel(const SubprocessChannel&) = delete;
  SubprocessChannel& operator=(const SubprocessChannel&) = delete;

  std::vector<std::string> exchange(const std::string& body, std::size_t expected,
                                    std::chrono::milliseconds timeout) override {
    if (pid_ <= 0) start();
    try {
      return pump(body, expected, timeout);
    } catch (...) {
      stop();
      throw;
    }
  }

  void reset() override { stop(); }

 private:
  void start() {
    // Writes to a dead child must surface as EPIPE, not kill the caller.
    static const bool ignore_sigpipe = [] {
      ::signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)ignore_sigpipe;

    int in[2];
    int out[2];
    if (::pipe2(in, O_CLOEXEC) != 0) fail_errno("pipe");
    if (::pipe2(out, O_CLOEXEC) != 0) {
      ::close(in[0]);
      ::close(in[1]);
      fail_errno("pipe");
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
      for (int fd : {in[0], in[1], out[0], out[1]}) ::close(fd);
      fail_errno("fork");
    }
    if (pid == 0) {
      ::dup2(in[0], STDIN_FILENO);
      ::dup2(out[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    pid_ = pid;
    to_child_ = in[1];
    from_child_ = out[0];
    ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
    ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
    buffer_.clear();
  }

  void stop() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) {
          pid_ = -1;
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
      }
    }
    pid_ = -1;
    buffer_.clear();
  }

  [[noreturn]] void fail_errno(const char* what) {
    throw Error(ErrorCode::kBackendFailure,
                std::string(what) + ": " + std::strerror(errno));
  }

  // Interleaves writing and reading so neither pipe buffer can fill up and
  // deadlock both processes.
  std::vector<std::string> pump(const std::string& body, std::size_t expected,
                                std::chrono::milliseconds timeout) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + timeout;
    std::vector<std::string> lines;
    std::size_t written = 0;
    take_lines(lines, expected);
    char chunk[65536];
    while (lines.size() < expected) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - clock::now());
      if (left.count() <= 0) {
        throw Error(ErrorCode::kTimeout,
                    "external scorer did not answer " +
                        std::to_string(expected - lines.size()) + " of " +
                        std::to_string(expected) + " requests within " +
                        std::to_string(timeout.count()) + " ms");
      }
      pollfd fds[2] = {{from_child_, POLLIN, 0}, {to_child_, POLLOUT, 0}};
      const nfds_t n = written < body.size() ? 2 : 1;
      const int rc = ::poll(fds, n, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        fail_errno("poll");
      }
      if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const ssize_t w = ::write(to_child_, body.data() + written,
                                  body.size() - written);
        if (w < 0 && errno != EAGAIN && errno != EINTR) {
          throw Error(ErrorCode::kBackendFailure,
                      "external scorer closed its input: " +
                          std::string(std::strerror(errno)));
        }
        if (w > 0) written += static_cast<std::size_t>(w);
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        const ssize_t r = ::read(from_child_, chunk, sizeof chunk);
        if (r == 0) {
          throw Error(ErrorCode::kBackendFailure,
                      "external scorer exited after " +
                          std::to_string(lines.size()) + " of " +
                          std::to_string(expected) + " responses");
        }
        if (r < 0 && errno != EAGAIN && errno != EINTR) fail_errno("read");
        if (r > 0) {
          buffer_.append(chunk, static_cast<std::size_t>(r));
          take_lines(lines, expected);
        }
      }
    }
    return lines;
  }

  void take_lines(std::vector<std::string>& lines, std::size_t expected) {
    std::size_t pos = 0;
    while (lines.size() < expected) {
      const auto nl = buffer_.find('\n', pos);
      if (nl == std::string::npos) break;
      std::string line = buffer_.substr(pos, nl - pos);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!text::trim(line).empty()) lines.push_back(std::move(line));
      pos = nl + 1;
    }
    buffer_.erase(0, pos);
  }

  std::string command_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// HTTP endpoint accepting an NDJSON request body via POST and answering
/// with an NDJSON body.
class HttpChannel : public ScorerChannel {
 public:
  /// `url` has the form http://host:port/path.
  explicit HttpChannel(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
      throw Error(ErrorCode::kConfig, "scorer URL lacks a scheme: " + url);
    }
    const auto slash = url.find('/', scheme + 3);
    origin_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
  }

  std::vector<std::string> exchange(const std::string& body, std::size_t,
                                    std::chrono::milliseconds timeout) override {
    httplib::Client client(origin_);
    const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usec =
        std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
    client.set_connection_timeout(sec.count(), usec.count());
    client.set_read_timeout(sec.count(), usec.count());
    client.set_write_timeout(sec.count(), usec.count());
    const auto res = client.Post(path_, body, "application/x-ndjson");
    if (!res) {
      if (res.error() == httplib::Error::Read ||
          res.error() == httplib::Error::ConnectionTimeout) {
        throw Error(ErrorCode::kTimeout, "external scorer at " + origin_ + path_ +
                                             ": " + httplib::to_string(res.error()));
      }
      throw Error(ErrorCode::kBackendFailure, "external scorer at " + origin_ +
                                                  path_ + ": " +
                                                  httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kBackendFailure,
                  "external scorer answered HTTP " + std::to_string(res->status));
    }
    std::vector<std::string> lines;
    for (auto& line : text::split(res->body, '\n')) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!text::trim(line).empty()) lines.push_back(std::move(line));
    }
    return lines;
  }

 private:
  std::string origin_;
  std::string path_;
};

inline std::string request_line(const ScoreRequest& r) {
  json j;
  j["id"] = r.id;
  j["source"] = r.source;
  j["target_tokens"] = r.target_tokens;
  return j.dump() + "\n";
}

/// Checks a batch of response lines against their requests and returns the
/// log-probabilities in request order. Every request must be answered
/// exactly once with len(target_tokens) + 1 values.
inline std::vector<TokenLogProbs> match_responses(
    std::span<const ScoreRequest> requests,
    std::span<const std::string> lines) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!index.emplace(requests[i].id, i).second) {
      throw Error(ErrorCode::kProtocolViolation,
                  "duplicate request id " + requests[i].id);
    }
  }
  std::vector<TokenLogProbs> out(requests.size());
  std::vector<bool> seen(requests.size(), false);
  for (const auto& line : lines) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kProtocolViolation,
                  std::string("malformed response line: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("token_logprobs") || !j["token_logprobs"].is_array()) {
      throw Error(ErrorCode::kProtocolViolation,
                  "response lacks id or token_logprobs: " + line);
    }
    const auto id = j["id"].get<std::string>();
    const auto it = index.find(id);
    if (it == index.end()) {
      throw Error(ErrorCode::kProtocolViolation, "response for unknown id " + id);
    }
    if (seen[it->second]) {
      throw Error(ErrorCode::kProtocolViolation, "duplicate response for id " + id);
    }
    seen[it->second] = true;
    const auto& req = requests[it->second];
    TokenLogProbs lp;
    for (const auto& v : j["token_logprobs"]) {
      if (!v.is_number()) {
        throw Error(ErrorCode::kProtocolViolation,
                    "non-numeric log-probability for id " + id);
      }
      lp.logprobs.push_back(v.get<double>());
    }
    if (lp.size() != req.target_tokens.size() + 1) {
      throw Error(ErrorCode::kProtocolViolation,
                  "id " + id + ": expected " +
                      std::to_string(req.target_tokens.size() + 1) +
                      " log-probabilities, got " + std::to_string(lp.size()));
    }
    try {
      lp.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kProtocolViolation, "id " + id + ": " + e.what());
    }
    out[it->second] = std::move(lp);
  }
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) missing.push_back(requests[i].id);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kProtocolViolation,
                std::to_string(missing.size()) + " request(s) unanswered, first " +
                    missing.front());
  }
  return out;
}

struct ExternalOptions {
  std::chrono::milliseconds timeout{60000};
  std::string length_unit = "token";
  /// Requests per exchange.
  std::size_t batch_size = 512;
};

/// Scorer reached over one or more channels. Each channel is used by one
/// exchange at a time; a batch is split across channels in contiguous
/// chunks, and completeness is enforced per chunk.
class ExternalBackend : public ScorerBackend {
 public:
  ExternalBackend(std::string name,
                  std::vector<std::unique_ptr<ScorerChannel>> channels,
                  ExternalOptions options = {})
      : name_(std::move(name)), options_(std::move(options)) {
    if (channels.empty()) {
      throw Error(ErrorCode::kConfig, "external backend needs a channel");
    }
    for (auto& c : channels) {
      slots_.push_back(std::make_unique<Slot>());
      slots_.back()->channel = std::move(c);
    }
  }

  /// `location` is an http(s) URL or a shell command.
  static std::unique_ptr<ExternalBackend> connect(std::string name,
                                                  const std::string& location,
                                                  std::size_t connections = 1,
                                                  ExternalOptions options = {}) {
    std::vector<std::unique_ptr<ScorerChannel>> channels;
    for (std::size_t i = 0; i < std::max<std::size_t>(connections, 1); ++i) {
      if (location.starts_with("http://") || location.starts_with("https://")) {
        channels.push_back(std::make_unique<HttpChannel>(location));
      } else {
        channels.push_back(std::make_unique<SubprocessChannel>(location));
      }
    }
    return std::make_unique<ExternalBackend>(std::move(name), std::move(channels),
                                             std::move(options));
  }

  const std::string& name() const override { return name_; }
  BackendKind kind() const override { return BackendKind::kExternal; }
  std::string length_unit() const override { return options_.length_unit; }

  std::vector<TokenLogProbs> score_batch(
      std::span<const ScoreRequest> requests) override {
    std::set<std::string_view> ids;
    for (const auto& r : requests) {
      if (!ids.insert(r.id).second) {
        throw Error(ErrorCode::kProtocolViolation, "duplicate request id " + r.id);
      }
    }
    std::vector<TokenLogProbs> out(requests.size());
    const std::size_t per = std::max<std::size_t>(options_.batch_size, 1);
    std::vector<std::span<const ScoreRequest>> chunks;
    for (std::size_t i = 0; i < requests.size(); i += per) {
      chunks.push_back(requests.subspan(i, std::min(per, requests.size() - i)));
    }
    if (slots_.size() == 1 || chunks.size() <= 1) {
      for (const auto& c : chunks) run_chunk(*slots_.front(), c, out, requests);
      return out;
    }
    // Chunk c goes to channel c % slots; each worker owns one channel.
    std::vector<std::future<void>> workers;
    for (std::size_t s = 0; s < slots_.size() && s < chunks.size(); ++s) {
      workers.push_back(std::async(std::launch::async, [&, s] {
        for (std::size_t c = s; c < chunks.size(); c += slots_.size()) {
          run_chunk(*slots_[s], chunks[c], out, requests);
        }
      }));
    }
    std::exception_ptr first;
    for (auto& w : workers) {
      try {
        w.get();
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
    return out;
  }

 private:
  struct Slot {
    std::mutex mu;
    std::unique_ptr<ScorerChannel> channel;
  };

  void run_chunk(Slot& slot, std::span<const ScoreRequest> chunk,
                 std::vector<TokenLogProbs>& out,
                 std::span<const ScoreRequest> all) {
    std::string body;
    for (const auto& r : chunk) body += request_line(r);
    std::vector<std::string> lines;
    {
      std::lock_guard lock(slot.mu);
      lines = slot.channel->exchange(body, chunk.size(), options_.timeout);
      try {
        auto lps = match_responses(chunk, lines);
        const auto offset = static_cast<std::size_t>(chunk.data() - all.data());
        for (std::size_t i = 0; i < lps.size(); ++i) {
          out[offset + i] = std::move(lps[i]);
        }
      } catch (...) {
        slot.channel->reset();
        throw;
      }
    }
  }

  std::string name_;
  ExternalOptions options_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

/// Scores `requests` on an external backend; results are keyed by request
/// id and returned in request order.
inline std::vector<std::pair<std::string, TokenLogProbs>> score_batch_external(
    ExternalBackend& backend, std::span<const ScoreRequest> requests) {
  auto lps = backend.score_batch(requests);
  std::vector<std::pair<std::string, TokenLogProbs>> out;
  out.reserve(lps.size());
  for (std::size_t i = 0; i < lps.size(); ++i) {
    out.emplace_back(requests[i].id, std::move(lps[i]));
  }
  return out;
}

}  // namespace minpair

#endif  // MINPAIR_EXTERNAL_HPP_
