#ifndef MINPAIR_RECORD_STORE_HPP_
#define MINPAIR_RECORD_STORE_HPP_

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "minpair/error.hpp"
#include "minpair/validate.hpp"

namespace minpair {

struct DecisionOutcome {
  std::string id;
  ValidationStatus status = ValidationStatus::kNeedsReview;
  std::uint64_t version = 0;
  /// True when the request repeated an already applied decision.
  bool replayed = false;
};

struct QueuePage {
  std::vector<ValidationRecord> items;
  /// Id of the last item of a full page, else empty.
  std::string next_cursor;
};

using StatusCounts = std::map<ErrorType, std::map<ValidationStatus, std::size_t>>;

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) %
                  1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms.count()));
  return buf;
}

/// File-backed validation records. The directory holds
///   records.base.jsonl  classification output, never modified
///   decisions.jsonl     append-only decision log, fsynced per decision
///   records.jsonl       current state, rewritten atomically
/// Opening replays the log over the base, so the log is authoritative.
/// One writer at a time; readers share.
class RecordStore {
 public:
  static constexpr const char* kBaseFile = "records.base.jsonl";
  static constexpr const char* kLogFile = "decisions.jsonl";
  static constexpr const char* kStateFile = "records.jsonl";

  /// Starts a store with an empty log. Fails if `dir` already has one.
  static std::unique_ptr<RecordStore> create(const std::filesystem::path& dir,
                                             std::span<const ValidationRecord> records) {
    std::filesystem::create_directories(dir);
    if (std::filesystem::exists(dir / kLogFile) &&
        std::filesystem::file_size(dir / kLogFile) > 0) {
      throw Error(ErrorCode::kIo, (dir / kLogFile).string() +
                                      " already holds decisions; refusing to reset");
    }
    std::vector<json> lines;
    for (const auto& r : records) lines.push_back(to_json(r));
    text::write_file_atomic(dir / kBaseFile, dump_jsonl(lines));
    text::write_file_atomic(dir / kLogFile, "");
    return open(dir);
  }

  static std::unique_ptr<RecordStore> open(const std::filesystem::path& dir) {
    std::unique_ptr<RecordStore> s(new RecordStore(dir));
    s->load();
    return s;
  }

  ~RecordStore() {
    if (log_fd_ >= 0) ::close(log_fd_);
  }

  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  const std::filesystem::path& dir() const { return dir_; }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return order_.size();
  }

  /// Records in their original order.
  std::vector<ValidationRecord> snapshot() const {
    std::shared_lock lock(mu_);
    std::vector<ValidationRecord> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(records_.at(id));
    return out;
  }

  std::optional<ValidationRecord> get(const std::string& id) const {
    std::shared_lock lock(mu_);
    const auto it = records_.find(id);
    if (it == records_.end()) return std::nullopt;
    return it->second;
  }

  /// NEEDS_REVIEW records with id > cursor, ordered by id.
  QueuePage pending(const std::string& cursor, std::size_t limit) const {
    std::shared_lock lock(mu_);
    QueuePage page;
    for (auto it = records_.upper_bound(cursor);
         it != records_.end() && page.items.size() < limit; ++it) {
      if (it->second.status == ValidationStatus::kNeedsReview) {
        page.items.push_back(it->second);
      }
    }
    if (limit > 0 && page.items.size() == limit) {
      page.next_cursor = page.items.back().id();
    }
    return page;
  }

  StatusCounts stats() const {
    std::shared_lock lock(mu_);
    StatusCounts out;
    for (const auto& [id, r] : records_) ++out[r.human.error_type][r.status];
    return out;
  }

  /// Validates, logs (durably) and applies one decision. Repeating an
  /// acknowledged (id, expected_version, decision) returns its outcome again
  /// without applying anything.
  DecisionOutcome decide(const DecisionRequest& req) {
    std::unique_lock lock(mu_);
    const auto it = records_.find(req.id);
    if (it == records_.end()) {
      throw Error(ErrorCode::kUnknownId, "no record with id " + req.id);
    }
    if (const auto h = history_.find({req.id, req.expected_version});
        h != history_.end() && it->second.version != req.expected_version) {
      if (same_decision(h->second.request, req)) {
        auto out = h->second.outcome;
        out.replayed = true;
        return out;
      }
    }
    auto next = apply_decision(it->second, req);
    append_log(req);
    it->second = std::move(next);
    const DecisionOutcome out{req.id, it->second.status, it->second.version, false};
    history_[{req.id, req.expected_version}] = {req, out};
    write_state();
    return out;
  }

 private:
  struct Applied {
    DecisionRequest request;
    DecisionOutcome outcome;
  };

  explicit RecordStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static bool same_decision(const DecisionRequest& a, const DecisionRequest& b) {
    return a.decision == b.decision &&
           (a.decision != Decision::kMarkContrastive ||
            a.manually_derived_correct == b.manually_derived_correct);
  }

  void load() {
    if (!std::filesystem::exists(dir_ / kBaseFile)) {
      throw Error(ErrorCode::kIo, "no record store at " + dir_.string());
    }
    for (const auto& j : read_jsonl(dir_ / kBaseFile)) {
      auto r = validation_record_from_json(j);
      const auto id = r.id();
      if (!records_.emplace(id, std::move(r)).second) {
        throw Error(ErrorCode::kDuplicateId, dir_.string() + ": duplicate record " + id);
      }
      order_.push_back(id);
    }
    replay();
    log_fd_ = ::open((dir_ / kLogFile).c_str(),
                     O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (log_fd_ < 0) {
      throw Error(ErrorCode::kIo, "cannot open " + (dir_ / kLogFile).string() +
                                      ": " + std::strerror(errno));
    }
    write_state();
  }

  void replay() {
    const auto path = dir_ / kLogFile;
    if (!std::filesystem::exists(path)) return;
    std::string content = text::read_file(path);
    // A line without its newline was never acknowledged; drop it.
    if (!content.empty() && content.back() != '\n') {
      const auto keep = content.rfind('\n');
      content.resize(keep == std::string::npos ? 0 : keep + 1);
      std::filesystem::resize_file(path, content.size());
    }
    std::size_t line_no = 0;
    for (const auto& line : text::split(content, '\n')) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(line_no);
      DecisionRequest req;
      try {
        const auto j = json::parse(line);
        req.id = j.at("id").get<std::string>();
        const auto d = parse_decision(j.at("decision").get<std::string>());
        if (!d) throw Error(ErrorCode::kMalformedRecord, where + ": bad decision");
        req.decision = *d;
        req.expected_version = j.at("expected_version").get<std::uint64_t>();
        req.reviewer = j.at("reviewer").get<std::string>();
        if (j.contains("manually_derived_correct") &&
            !j["manually_derived_correct"].is_null()) {
          req.manually_derived_correct = j["manually_derived_correct"].get<std::string>();
        }
        if (j.contains("reviewer_note") && !j["reviewer_note"].is_null()) {
          req.reviewer_note = j["reviewer_note"].get<std::string>();
        }
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformedRecord, where + ": " + e.what());
      }
      const auto it = records_.find(req.id);
      if (it == records_.end()) {
        throw Error(ErrorCode::kMalformedRecord, where + ": unknown id " + req.id);
      }
      try {
        it->second = apply_decision(it->second, req);
      } catch (const Error& e) {
        throw Error(ErrorCode::kMalformedRecord,
                    where + ": log does not replay: " + e.what());
      }
      history_[{req.id, req.expected_version}] = {
          req, {req.id, it->second.status, it->second.version, false}};
    }
  }

  void append_log(const DecisionRequest& req) {
    json j;
    j["id"] = req.id;
    j["decision"] = std::string(to_string(req.decision));
    j["timestamp"] = utc_timestamp();
    j["reviewer"] = req.reviewer;
    j["expected_version"] = req.expected_version;
    if (req.manually_derived_correct) {
      j["manually_derived_correct"] = *req.manually_derived_correct;
    }
    if (req.reviewer_note) j["reviewer_note"] = *req.reviewer_note;
    const std::string line = j.dump() + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t w = ::write(log_fd_, line.data() + done, line.size() - done);
      if (w < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kIo,
                    std::string("decision log write failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(w);
    }
    if (::fsync(log_fd_) != 0) {
      throw Error(ErrorCode::kIo,
                  std::string("decision log fsync failed: ") + std::strerror(errno));
    }
  }

  void write_state() const {
    std::vector<json> lines;
    lines.reserve(order_.size());
    for (const auto& id : order_) lines.push_back(to_json(records_.at(id)));
    text::write_file_atomic(dir_ / kStateFile, dump_jsonl(lines));
  }

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, ValidationRecord> records_;
  std::vector<std::string> order_;
  std::map<std::pair<std::string, std::uint64_t>, Applied> history_;
  int log_fd_ = -1;
};

inline json stats_to_json(const StatusCounts& counts) {
  json out = json::object();
  json total = json::object();
  for (const auto s : kAllStatuses) total[std::string(to_string(s))] = 0;
  for (const auto t : kAllErrorTypes) {
    const auto it = counts.find(t);
    if (it == counts.end()) continue;
    json row = json::object();
    for (const auto s : kAllStatuses) {
      const auto c = it->second.contains(s) ? it->second.at(s) : 0;
      row[std::string(to_string(s))] = c;
      total[std::string(to_string(s))] =
          total[std::string(to_string(s))].get<std::size_t>() + c;
    }
    out[std::string(to_string(t))] = row;
  }
  return {{"by_error_type", out}, {"total", total}};
}

}  // namespace minpair

#endif  // MINPAIR_RECORD_STORE_HPP_
