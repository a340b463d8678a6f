#pragma once

// JSON-over-HTTP session API, independent of the HTTP server library.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capp/session.hpp"

namespace capp {

struct HttpResponse {
  int status = 200;
  json body;
};

inline json error_body(const std::string& message) { return {{"error", message}}; }

/// Routes requests to a session store. `db` is the database audited by
/// GET /db/audit when no session is named.
class Service {
public:
  explicit Service(SessionStore& store, std::optional<OSEDatabase> db = std::nullopt)
      : store_(store), db_(std::move(db)) {}

  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body) {
    try {
      return route(method, split(path), query, body);
    } catch (const NotFound& e) {
      return {404, error_body(e.what())};
    } catch (const VersionConflict& e) {
      return {409, error_body(e.what())};
    } catch (const SelectionError& e) {
      return {422, error_body(e.what())};
    } catch (const ValidationError& e) {
      json b = error_body("validation findings");
      b["findings"] = to_json(e.report);
      return {422, b};
    } catch (const InputError& e) {
      return {400, error_body(e.what())};
    } catch (const std::exception& e) {
      return {500, error_body(e.what())};
    }
  }

private:
  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path.substr(0, path.find('?'))) {
      if (c == '/') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }

  static json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    auto j = parse_json_text(body, "request body");
    if (!j.is_object()) throw InputError("request body: expected an object");
    return j;
  }

  static long version_of(const json& b) {
    auto it = b.find("version");
    if (it == b.end() || !it->is_number_integer()) throw InputError("request body.version: expected an integer");
    return it->get<long>();
  }

  static json session_state(const Session& s) {
    json selections = json::array();
    for (const auto& m : s.matches())
      selections.push_back({{"face", m.face},
                            {"level", m.level},
                            {"selected", m.selected.empty() ? json(nullptr) : json(m.selected)},
                            {"candidates", m.candidates.size()}});
    json unmatched = json::array();
    for (const auto& u : s.plan().unmatched) unmatched.push_back({{"face", u.face}, {"reason", u.reason}});
    return {{"id", s.id()},
            {"version", s.version()},
            {"part", s.inputs().part.id},
            {"stale", s.stale()},
            {"synthesis", to_json(report_statistics(s.attributes().counts))},
            {"exceptions", {{"unmatched", unmatched}, {"inaccessible", s.plan().inaccessible}}},
            {"tensions", s.plan().tensions},
            {"audit_findings", audit_database(s.inputs().db).size()},
            {"selections", selections}};
  }

  static json faces_view(const Session& s) {
    json out = json::array();
    for (const auto& a : s.attributes().faces) {
      json j = to_json(a);
      const auto& m = s.face(a.id);
      j["level"] = m.level;
      j["selected"] = m.selected.empty() ? json(nullptr) : json(m.selected);
      out.push_back(std::move(j));
    }
    return out;
  }

  static json plan_view(const Session& s) {
    auto doc = s.export_document();
    return {{"version", s.version()}, {"stale", s.stale()}, {"plan", doc.data}, {"text", doc.text}};
  }

  HttpResponse route(const std::string& method, const std::vector<std::string>& p,
                     const std::map<std::string, std::string>& query, const std::string& body) {
    const auto n = p.size();
    if (n == 2 && p[0] == "db" && p[1] == "audit" && method == "GET") {
      if (auto it = query.find("session"); it != query.end())
        return {200, store_.read(it->second, [](const Session& s) { return to_json(audit_database(s.inputs().db)); })};
      if (!db_) throw NotFound("no database loaded; name a session with ?session=");
      return {200, to_json(audit_database(*db_))};
    }
    if (n == 0 || p[0] != "sessions") throw NotFound("no route for " + method + " /" + (n ? p[0] : ""));

    if (n == 1 && method == "POST") {
      auto id = store_.create(parse_body(body));
      return {201, store_.read(id, session_state)};
    }
    if (n < 2) throw NotFound("no route for " + method + " /sessions");
    const std::string& sid = p[1];

    if (n == 2 && method == "GET") return {200, store_.read(sid, session_state)};
    if (n == 3 && p[2] == "faces" && method == "GET") return {200, store_.read(sid, faces_view)};
    if (n == 5 && p[2] == "faces" && p[4] == "candidates" && method == "GET")
      return {200, store_.read(sid, [&](const Session& s) { return to_json(s.face(p[3])); })};
    if (n == 5 && p[2] == "faces" && p[4] == "selection" && method == "PUT") {
      auto b = parse_body(body);
      auto level_it = b.find("level");
      if (level_it == b.end() || !level_it->is_number_integer())
        throw InputError("request body.level: expected an integer");
      int level = level_it->get<int>();
      std::string candidate;
      if (auto c = b.find("candidate"); c != b.end() && !c->is_null()) {
        if (!c->is_string()) throw InputError("request body.candidate: expected a string");
        candidate = c->get<std::string>();
      }
      std::optional<CustomPayload> payload;
      if (auto c = b.find("custom"); c != b.end() && !c->is_null()) payload = custom_payload_from_json(*c);
      return {200, store_.mutate(sid, version_of(b), [&](Session& s) {
                (void)s.face(p[3]);
                s.select(p[3], level, candidate, payload);
                return json{{"version", s.version()}, {"stale", s.stale()}, {"face", to_json(s.face(p[3]))}};
              })};
    }
    if (n == 3 && p[2] == "rebuild" && method == "POST") {
      auto b = parse_body(body);
      return {200, store_.mutate(sid, version_of(b), [](Session& s) {
                s.rebuild();
                return plan_view(s);
              })};
    }
    if (n == 3 && p[2] == "plan" && method == "GET") return {200, store_.read(sid, plan_view)};
    if (n == 3 && p[2] == "whatif" && method == "POST") {
      auto b = parse_body(body);
      auto ose_id = io::str(io::field(b, "ose", "request body"), "request body.ose");
      std::vector<VaryField> vary;
      if (const auto* v = io::optional_field(b, "vary")) {
        const auto& a = io::array(*v, "request body.vary");
        for (std::size_t i = 0; i < a.size(); ++i)
          vary.push_back(io::enum_value<VaryField>(a[i], io::idx("request body.vary", i), vary_field_from_string));
      } else {
        vary = {VaryField::MfgType, VaryField::Mode, VaryField::Tmc};
      }
      return {200, store_.read(sid, [&](const Session& s) {
                const auto* ose = s.inputs().db.ose(ose_id);
                if (!ose) throw NotFound("no such OSE: " + ose_id);
                return json{{"ose", ose_id}, {"variants", to_json(what_if_expand(*ose, s.inputs().db, vary))}};
              })};
    }
    throw NotFound("no route for " + method + " /" + [&] {
      std::string s;
      for (const auto& x : p) s += (s.empty() ? "" : "/") + x;
      return s;
    }());
  }

  SessionStore& store_;
  std::optional<OSEDatabase> db_;
};

}  // namespace capp
