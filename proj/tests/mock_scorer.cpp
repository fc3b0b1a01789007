// Test double for the external scorer protocol. Answers each request with the
// row of a score table, over stdin/stdout or as an HTTP endpoint. Flags
// inject the faults the client must detect.

#include <poll.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "minpair/scorer.hpp"

using minpair::json;

namespace {

struct Faults {
  bool duplicate = false;  // answer the first request twice
  bool drop = false;       // never answer the first request
  bool rename = false;     // answer the first request under a foreign id
  bool short_row = false;  // one log-probability too few
  std::size_t window = 1;  // reverse response order within windows
  int sleep_ms = 0;
};

class Mock {
 public:
  Mock(minpair::TableBackend table, Faults faults)
      : table_(std::move(table)), faults_(faults) {}

  // Returns zero or more response lines for one request line.
  std::vector<std::string> answer(const std::string& line) {
    const auto j = json::parse(line);
    minpair::ScoreRequest r{j.at("id").get<std::string>(),
                            j.at("source").get<std::string>(),
                            j.at("target_tokens").get<std::vector<std::string>>()};
    const bool first = count_++ == 0;
    auto lp = table_.score(r);
    if (faults_.short_row && lp.size() > 1) lp.logprobs.pop_back();
    json out;
    out["id"] = first && faults_.rename ? r.id + "?" : r.id;
    out["token_logprobs"] = lp.logprobs;
    if (faults_.sleep_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(faults_.sleep_ms));
    }
    if (first && faults_.drop) return {};
    if (first && faults_.duplicate) return {out.dump(), out.dump()};
    return {out.dump()};
  }

  const Faults& faults() const { return faults_; }

 private:
  minpair::TableBackend table_;
  Faults faults_;
  std::size_t count_ = 0;
};

void flush(std::vector<std::string>& pending) {
  for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
    std::fputs(it->c_str(), stdout);
    std::fputc('\n', stdout);
  }
  pending.clear();
  std::fflush(stdout);
}

int serve_stdio(Mock& mock) {
  std::vector<std::string> pending;
  std::string buffer;
  char chunk[65536];
  for (;;) {
    // Without input for a moment, release a partially filled window.
    pollfd fd{STDIN_FILENO, POLLIN, 0};
    if (::poll(&fd, 1, pending.empty() ? -1 : 20) == 0) {
      flush(pending);
      continue;
    }
    const ssize_t n = ::read(STDIN_FILENO, chunk, sizeof chunk);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos = 0;
    for (auto nl = buffer.find('\n'); nl != std::string::npos;
         nl = buffer.find('\n', pos)) {
      const auto line = buffer.substr(pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) continue;
      for (auto& r : mock.answer(line)) {
        pending.push_back(std::move(r));
        if (pending.size() >= mock.faults().window) flush(pending);
      }
    }
    buffer.erase(0, pos);
  }
  flush(pending);
  return 0;
}

int serve_http(Mock& mock, int port) {
  httplib::Server server;
  std::mutex mu;
  server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    std::string body;
    std::vector<std::string> pending;
    for (const auto& line : minpair::text::split(req.body, '\n')) {
      if (line.empty()) continue;
      for (auto& r : mock.answer(line)) pending.push_back(std::move(r));
    }
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) body += *it + "\n";
    res.set_content(body, "application/x-ndjson");
  });
  if (port == 0) {
    port = server.bind_to_any_port("127.0.0.1");
  } else if (!server.bind_to_port("127.0.0.1", port)) {
    std::cerr << "mock_scorer: cannot bind port " << port << "\n";
    return 1;
  }
  std::cout << port << std::endl;
  server.listen_after_bind();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mock external scorer"};
  std::string table_path;
  Faults faults;
  int http_port = -1;
  app.add_option("--table", table_path, "score table TSV")->required();
  app.add_flag("--duplicate", faults.duplicate);
  app.add_flag("--drop", faults.drop);
  app.add_flag("--rename", faults.rename);
  app.add_flag("--short", faults.short_row);
  app.add_option("--window", faults.window)->check(CLI::PositiveNumber);
  app.add_option("--sleep-ms", faults.sleep_ms);
  app.add_option("--http", http_port, "serve POST /score on this port (0: any)");
  CLI11_PARSE(app, argc, argv);
  try {
    Mock mock(minpair::TableBackend::load("mock", table_path), faults);
    return http_port >= 0 ? serve_http(mock, http_port) : serve_stdio(mock);
  } catch (const std::exception& e) {
    std::cerr << "mock_scorer: " << e.what() << "\n";
    return 1;
  }
}
