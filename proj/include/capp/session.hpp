#pragma once

// Interactive preparation sessions: selections, rebuilds, an append-only
// event log and a directory-backed store.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "capp/pipeline.hpp"

namespace capp {

class NotFound : public Error {
public:
  using Error::Error;
};

class VersionConflict : public Error {
public:
  VersionConflict(long expected, long actual)
      : Error("version conflict: request carries version " + std::to_string(expected) + ", session is at " +
              std::to_string(actual)) {}
};

struct SessionEvent {
  long seq = 0;
  std::string kind;  // "select" or "rebuild"
  std::string face;
  int level = 0;
  std::string candidate;
  std::optional<CustomPayload> payload;

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

inline json to_json(const SessionEvent& e) {
  json j = {{"seq", e.seq}, {"kind", e.kind}};
  if (e.kind == "select") {
    j["face"] = e.face;
    j["level"] = e.level;
    j["candidate"] = e.candidate;
    j["custom"] = e.payload ? to_json(*e.payload) : json(nullptr);
  }
  return j;
}

inline SessionEvent session_event_from_json(const json& j, const std::string& path) {
  SessionEvent e;
  const auto& seq = io::field(j, "seq", path);
  if (!seq.is_number_integer()) throw io::schema(path + ".seq", "expected an integer");
  e.seq = seq.get<long>();
  e.kind = io::str(io::field(j, "kind", path), path + ".kind");
  if (e.kind == "select") {
    e.face = io::str(io::field(j, "face", path), path + ".face");
    const auto& level = io::field(j, "level", path);
    if (!level.is_number_integer()) throw io::schema(path + ".level", "expected an integer");
    e.level = level.get<int>();
    e.candidate = io::str(io::field(j, "candidate", path), path + ".candidate");
    if (const auto* c = io::optional_field(j, "custom")) e.payload = custom_payload_from_json(*c);
  } else if (e.kind != "rebuild") {
    throw io::schema(path + ".kind", "unknown event kind \"" + e.kind + "\"");
  }
  return e;
}

/// One planner's working state over a part. The version counts applied
/// mutations and equals the event log length.
class Session {
public:
  static Session create(std::string id, json inputs) {
    Session s;
    s.id_ = std::move(id);
    const auto* tol = io::optional_field(inputs, "tolerances");
    s.in_ = inputs_from_json(io::field(inputs, "part", "session"), io::field(inputs, "osedb", "session"),
                             io::field(inputs, "tools", "session"), tol);
    s.inputs_ = std::move(inputs);
    s.attributes_ = stage("transform", [&] { return transform_part(s.in_.part, s.in_.tol); });
    s.matches_ = stage("match", [&] { return match_all(s.attributes_, s.in_.db, s.in_.tools); });
    s.build();
    return s;
  }

  /// Recreates a session by replaying its event log against its inputs.
  static Session from_document(const json& doc) {
    auto s = create(io::str(io::field(doc, "id", "session"), "session.id"), io::field(doc, "inputs", "session"));
    const auto& events = io::array(io::field(doc, "events", "session"), "session.events");
    for (std::size_t i = 0; i < events.size(); ++i) s.apply(session_event_from_json(events[i], io::idx("session.events", i)));
    return s;
  }

  [[nodiscard]] json to_document() const {
    json events = json::array();
    for (const auto& e : events_) events.push_back(to_json(e));
    return {{"id", id_}, {"version", version_}, {"inputs", inputs_}, {"events", events}};
  }

  void check_version(long expected) const {
    if (expected != version_) throw VersionConflict(expected, version_);
  }

  void select(const std::string& face, int level, const std::string& candidate,
              const std::optional<CustomPayload>& payload) {
    apply({version_ + 1, "select", face, level, candidate, payload});
  }

  void rebuild() { apply({version_ + 1, "rebuild", "", 0, "", std::nullopt}); }

  [[nodiscard]] PlanDocument export_document() const { return generate_documentation(plan_, in_.db, in_.tools); }

  [[nodiscard]] FaceMatch& face(const std::string& fid) {
    for (auto& m : matches_)
      if (m.face == fid) return m;
    throw NotFound("no such face: " + fid);
  }
  [[nodiscard]] const FaceMatch& face(const std::string& fid) const {
    for (const auto& m : matches_)
      if (m.face == fid) return m;
    throw NotFound("no such face: " + fid);
  }

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] long version() const { return version_; }
  [[nodiscard]] bool stale() const { return stale_; }
  [[nodiscard]] const Inputs& inputs() const { return in_; }
  [[nodiscard]] const TransformResult& attributes() const { return attributes_; }
  [[nodiscard]] const std::vector<FaceMatch>& matches() const { return matches_; }
  [[nodiscard]] const ProcessPlan& plan() const { return plan_; }
  [[nodiscard]] const std::vector<SessionEvent>& events() const { return events_; }

private:
  void apply(const SessionEvent& e) {
    if (e.seq != version_ + 1) throw Error("event " + std::to_string(e.seq) + " out of order");
    if (e.kind == "select") {
      auto& fm = face(e.face);
      FaceMatch next = fm;
      select_candidate(next, e.level, e.candidate, e.payload, in_.db, in_.tools);
      fm = std::move(next);
      stale_ = true;
    } else {
      build();
    }
    events_.push_back(e);
    version_ = e.seq;
  }

  void build() {
    plan_ = stage("plan", [&] { return build_plan(in_.part, attributes_, matches_, in_.db, in_.tools); });
    stale_ = false;
  }

  std::string id_;
  long version_ = 0;
  json inputs_;
  Inputs in_;
  TransformResult attributes_;
  std::vector<FaceMatch> matches_;
  ProcessPlan plan_;
  bool stale_ = false;
  std::vector<SessionEvent> events_;
};

/// Sessions persisted as one JSON document per session in a directory.
/// Mutations are serialized; reads share the lock.
class SessionStore {
public:
  explicit SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      const auto name = entry.path().stem().string();
      long n = 0;
      if (entry.path().extension() == ".json" && std::sscanf(name.c_str(), "S-%ld", &n) == 1)
        next_ = std::max(next_, n + 1);
    }
  }

  std::string create(json inputs) {
    std::unique_lock lock(mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "S-%04ld", next_);
    auto s = std::make_shared<Session>(Session::create(buf, std::move(inputs)));
    ++next_;
    save(*s);
    sessions_[s->id()] = s;
    return s->id();
  }

  /// Runs `f` on the session under a shared lock.
  template <class F>
  auto read(const std::string& id, F&& f) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = sessions_.find(id); it != sessions_.end()) return f(static_cast<const Session&>(*it->second));
    }
    std::unique_lock lock(mutex_);
    return f(static_cast<const Session&>(load(id)));
  }

  /// Runs `f` on the session under an exclusive lock after checking the
  /// expected version, then persists the result.
  template <class F>
  auto mutate(const std::string& id, long expected_version, F&& f) {
    std::unique_lock lock(mutex_);
    Session& s = load(id);
    s.check_version(expected_version);
    Session work = s;
    auto result = f(work);
    save(work);
    s = std::move(work);
    return result;
  }

  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

private:
  Session& load(const std::string& id) {
    if (auto it = sessions_.find(id); it != sessions_.end()) return *it->second;
    const auto path = file(id);
    if (id.find('/') != std::string::npos || id.find("..") != std::string::npos || !std::filesystem::exists(path))
      throw NotFound("no such session: " + id);
    auto s = std::make_shared<Session>(Session::from_document(read_json_file(path.string())));
    return *(sessions_[id] = s);
  }

  void save(const Session& s) const {
    const auto path = file(s.id());
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + tmp);
      out << s.to_document().dump() << "\n";
    }
    std::filesystem::rename(tmp, path);
  }

  [[nodiscard]] std::filesystem::path file(const std::string& id) const { return dir_ / (id + ".json"); }

  std::filesystem::path dir_;
  std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long next_ = 1;
};

}  // namespace capp
