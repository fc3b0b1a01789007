#ifndef MINPAIR_REVIEW_SERVICE_HPP_
#define MINPAIR_REVIEW_SERVICE_HPP_

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>

#include <httplib.h>

#include "minpair/record_store.hpp"
#include "minpair/resources.hpp"
#include "minpair/validate.hpp"

namespace minpair {

struct ReviewServiceOptions {
  /// Shared secret expected in the X-Review-Secret header of decisions.
  std::string secret;
  /// Review UI bundle served at "/"; a placeholder page when unset.
  std::optional<std::filesystem::path> static_dir;
  std::size_t default_limit = 20;
  std::size_t max_limit = 500;
};

namespace detail {

inline json token_spans_json(std::span<const Span> spans) {
  json arr = json::array();
  for (const auto& s : spans) arr.push_back(json::array({s.begin, s.end}));
  return arr;
}

inline bool secrets_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i] ^ (i < b.size() ? b[i] : 0));
  }
  return diff == 0;
}

}  // namespace detail

/// Display projection of a pending record. Spans index the token lists;
/// the machine reference spans mark where the contrastive key was found.
inline json queue_item_json(const ValidationRecord& r, const RuleResources& res) {
  const auto machine = tokenize(r.machine_reference);
  json machine_spans = json::array();
  try {
    const auto key = extract_phenomenon_key(r.human.contrastive, r.human.error_type,
                                            r.human.contrastive_spans, res);
    if (const auto at = locate_key(machine, key)) {
      machine_spans = detail::token_spans_json(*at);
    }
  } catch (const Error&) {
    // records without a usable key are still shown, just unhighlighted
  }
  json j;
  j["id"] = r.id();
  j["error_type"] = std::string(to_string(r.human.error_type));
  j["source"] = r.human.source;
  j["human_correct"] = r.human.correct;
  j["human_contrastive"] = r.human.contrastive;
  j["machine_reference"] = r.machine_reference;
  j["engine_name"] = r.engine_name;
  j["version"] = r.version;
  j["tokens"] = {{"human_correct", tokenize(r.human.correct).tokens},
                 {"human_contrastive", tokenize(r.human.contrastive).tokens},
                 {"machine_reference", machine.tokens}};
  j["spans"] = {{"human_correct", detail::token_spans_json(r.human.correct_spans)},
                {"human_contrastive",
                 detail::token_spans_json(r.human.contrastive_spans)},
                {"machine_reference", machine_spans}};
  return j;
}

/// Parses a POST /api/decisions body. Throws kMalformedRecord.
inline DecisionRequest parse_decision_request(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("body is not JSON: ") + e.what());
  }
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) {
      if (required) throw Error(ErrorCode::kMalformedRecord, std::string("missing ") + key);
      return std::nullopt;
    }
    if (!j[key].is_string()) {
      throw Error(ErrorCode::kMalformedRecord, std::string(key) + " must be a string");
    }
    return j[key].get<std::string>();
  };
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "body must be an object");
  DecisionRequest req;
  req.id = *str("id", true);
  const auto d = parse_decision(*str("decision", true));
  if (!d) {
    throw Error(ErrorCode::kMalformedRecord,
                "decision must be accept, mark_contrastive or drop");
  }
  req.decision = *d;
  if (!j.contains("expected_version") || !j["expected_version"].is_number_unsigned()) {
    throw Error(ErrorCode::kMalformedRecord,
                "expected_version must be a non-negative integer");
  }
  req.expected_version = j["expected_version"].get<std::uint64_t>();
  req.reviewer = *str("reviewer", true);
  if (text::trim(req.reviewer).empty()) {
    throw Error(ErrorCode::kMalformedRecord, "reviewer must not be empty");
  }
  req.manually_derived_correct = str("manually_derived_correct", false);
  req.reviewer_note = str("reviewer_note", false);
  return req;
}

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return 400;
    case ErrorCode::kUnknownId: return 404;
    case ErrorCode::kVersionConflict: return 409;
    case ErrorCode::kIllegalTransition:
    case ErrorCode::kMissingCorrection: return 422;
    default: return 500;
  }
}

/// HTTP front end for one RecordStore:
///   GET  /api/queue?cursor=&limit=   pending records ordered by id
///   POST /api/decisions              apply a decision (shared secret)
///   GET  /api/stats                  counts per error type and status
class ReviewService {
 public:
  ReviewService(RecordStore& store, const RuleResources& res,
                ReviewServiceOptions options)
      : store_(store), res_(res), options_(std::move(options)) {
    if (options_.secret.empty()) {
      throw Error(ErrorCode::kConfig, "review service needs a shared secret");
    }
    routes();
  }

  /// Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    if (!server_.bind_to_port(host, port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
  }

  /// Blocks until stop().
  void listen() { server_.listen_after_bind(); }
  void wait_until_ready() { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

  json queue(const std::string& cursor, std::size_t limit) const {
    const auto page = store_.pending(cursor, limit);
    json items = json::array();
    for (const auto& r : page.items) items.push_back(queue_item_json(r, res_));
    return {{"items", items},
            {"next_cursor", page.next_cursor.empty() ? json(nullptr)
                                                     : json(page.next_cursor)}};
  }

  json stats() const {
    auto j = stats_to_json(store_.stats());
    j["records"] = store_.size();
    return j;
  }

 private:
  static void send_error(httplib::Response& res, int status, std::string_view code,
                         const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", code}, {"message", message}}.dump(),
                    "application/json");
  }

  void routes() {
    server_.Get("/api/queue", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      std::size_t limit = options_.default_limit;
      if (req.has_param("limit")) {
        try {
          const auto v = std::stoll(req.get_param_value("limit"));
          if (v < 1) throw std::invalid_argument("limit");
          limit = std::min<std::size_t>(static_cast<std::size_t>(v), options_.max_limit);
        } catch (const std::exception&) {
          send_error(res, 400, "MALFORMED_RECORD", "limit must be a positive integer");
          return;
        }
      }
      const auto cursor = req.has_param("cursor") ? req.get_param_value("cursor") : "";
      res.set_content(queue(cursor, limit).dump(), "application/json");
    });

    server_.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(stats().dump(), "application/json");
    });

    server_.Post("/api/decisions", [this](const httplib::Request& req,
                                          httplib::Response& res) {
      if (!detail::secrets_equal(req.get_header_value("X-Review-Secret"),
                                 options_.secret)) {
        send_error(res, 401, "UNAUTHORIZED", "missing or wrong X-Review-Secret");
        return;
      }
      try {
        const auto out = store_.decide(parse_decision_request(req.body));
        res.set_content(json{{"id", out.id},
                             {"status", std::string(to_string(out.status))},
                             {"version", out.version},
                             {"replayed", out.replayed}}
                            .dump(),
                        "application/json");
      } catch (const Error& e) {
        json body{{"error", to_string(e.code())}, {"message", e.what()}};
        if (e.code() == ErrorCode::kVersionConflict) {
          // lets the client refresh without another round trip
          if (const auto cur = store_.get(parse_decision_request(req.body).id)) {
            body["current_version"] = cur->version;
            body["current_status"] = std::string(to_string(cur->status));
          }
        }
        res.status = http_status_for(e.code());
        res.set_content(body.dump(), "application/json");
      }
    });

    if (options_.static_dir) {
      if (!server_.set_mount_point("/", options_.static_dir->string())) {
        throw Error(ErrorCode::kIo,
                    "cannot serve UI from " + options_.static_dir->string());
      }
    } else {
      server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            "<!doctype html><meta charset=\"utf-8\"><title>minpair review</title>"
            "<p>No review UI bundle mounted. The API is at /api/queue, "
            "/api/decisions and /api/stats.</p>",
            "text/html; charset=utf-8");
      });
    }
  }

  RecordStore& store_;
  const RuleResources& res_;
  ReviewServiceOptions options_;
  httplib::Server server_;
};

}  // namespace minpair

#endif  // MINPAIR_REVIEW_SERVICE_HPP_
