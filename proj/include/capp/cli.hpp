#pragma once

// Command-line verbs over the pipeline, and the HTTP server for sessions.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Eigen before httplib: <resolv.h> defines a macro named _res.
#include "capp/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

namespace capp::cli {

enum ExitCode { Success = 0, InputFailure = 1, ValidationFindings = 2, Infeasible = 3 };

struct Options {
  std::string part, osedb, tools, out, tolerances, format = "json", ose, counts, store = "sessions";
  std::vector<std::string> vary;
  int port = 8080;
  std::string host = "127.0.0.1";
};

inline void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError(o.out + ": cannot write file");
  f << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline Part load_part(const Options& o) {
  auto part = part_from_json(read_json_file(o.part));
  InputReport r;
  r.part = validate_part(part);
  if (!r.ok()) throw ValidationError(std::move(r));
  return part;
}

inline Tolerances load_tolerances(const Options& o) {
  return o.tolerances.empty() ? Tolerances{} : tolerances_from_json(read_json_file(o.tolerances));
}

inline OSEDatabase load_db(const Options& o) {
  auto db = osedb_from_json(read_json_file(o.osedb));
  InputReport r;
  r.db = validate_db(db);
  if (!r.ok()) throw ValidationError(std::move(r));
  return db;
}

inline Inputs load_inputs(const Options& o) {
  return parse_inputs(o.part, o.osedb, o.tools,
                      o.tolerances.empty() ? std::nullopt : std::optional<std::string>(o.tolerances));
}

/// Parses "Plan=50,Cylinder=109,..." into per-type counts.
inline std::map<GeometryType, long> parse_counts(const std::string& text) {
  std::map<GeometryType, long> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    auto item = text.substr(pos, end - pos);
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("--counts: expected TYPE=COUNT, got \"" + item + "\"");
    auto type = geometry_type_from_string(item.substr(0, eq));
    if (!type) throw InputError("--counts: unknown geometry type \"" + item.substr(0, eq) + "\"");
    std::size_t used = 0;
    long n = 0;
    try {
      n = std::stol(item.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() - eq - 1 || n < 0)
      throw InputError("--counts: invalid count in \"" + item + "\"");
    if (out.count(*type)) throw InputError("--counts: " + item.substr(0, eq) + " given twice");
    out[*type] = n;
    pos = end + 1;
  }
  return out;
}

/// Installs the session routes and CORS headers on `server`.
inline void install_routes(httplib::Server& server, Service& service) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    auto r = service.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  const char* pattern = R"(/.*)";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  server.Put(pattern, handler);
  server.Options(pattern, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

inline int serve(const Options& o, std::ostream& err) {
  SessionStore store(o.store);
  std::optional<OSEDatabase> db;
  if (!o.osedb.empty()) db = load_db(o);
  Service service(store, db);
  httplib::Server server;
  install_routes(server, service);
  err << "serving on http://" << o.host << ":" << o.port << " (sessions in " << o.store << ")\n";
  if (!server.listen(o.host, o.port)) {
    err << "error: cannot listen on " << o.host << ":" << o.port << "\n";
    return InputFailure;
  }
  return Success;
}

/// Runs one verb. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Knowledge-based process planning for machined parts"};
  app.require_subcommand(1);
  Options o;

  auto add_inputs = [&](CLI::App* c, bool part, bool db, bool tools) {
    if (part) c->add_option("--part", o.part, "Part JSON")->required();
    if (db) c->add_option("--osedb", o.osedb, "OSE database JSON")->required();
    if (tools) c->add_option("--tools", o.tools, "Cutting sets JSON")->required();
    c->add_option("--out", o.out, "Output file (default stdout)");
    c->add_option("--tolerances", o.tolerances, "Classification tolerances JSON");
  };

  auto* transform = app.add_subcommand("transform", "Classify faces and compute attributes");
  add_inputs(transform, true, false, false);
  auto* match = app.add_subcommand("match", "Ranked candidates per face");
  add_inputs(match, true, true, true);
  auto* plan = app.add_subcommand("plan", "Full pipeline to a process plan");
  add_inputs(plan, true, true, true);
  plan->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  auto* audit = app.add_subcommand("audit", "Shadowing, duplicate and unsatisfiable OSEs");
  add_inputs(audit, false, true, false);
  auto* whatif = app.add_subcommand("whatif", "Configuration variants of one OSE");
  add_inputs(whatif, false, true, false);
  whatif->add_option("--ose", o.ose, "OSE id")->required();
  whatif->add_option("--vary", o.vary, "Fields to vary: mfg_type, mode, tmc")->delimiter(',');
  auto* report = app.add_subcommand("report", "Synthesis statistics");
  report->add_option("--counts", o.counts, "TYPE=COUNT,... per geometry type");
  report->add_option("--part", o.part, "Part JSON");
  report->add_option("--out", o.out, "Output file (default stdout)");
  report->add_option("--tolerances", o.tolerances, "Classification tolerances JSON");
  report->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  auto* srv = app.add_subcommand("serve", "HTTP session service");
  srv->add_option("--port", o.port, "Port")->check(CLI::Range(1, 65535));
  srv->add_option("--host", o.host, "Bind address");
  srv->add_option("--store", o.store, "Session directory");
  srv->add_option("--osedb", o.osedb, "OSE database audited by GET /db/audit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? Success : InputFailure;
  }

  try {
    if (transform->parsed()) {
      auto part = load_part(o);
      auto tol = load_tolerances(o);
      auto tr = stage("transform", [&] { return transform_part(part, tol); });
      emit(o, dump(attributes_document(part.id, tr)), out);
      return Success;
    }
    if (match->parsed()) {
      auto in = load_inputs(o);
      auto tr = stage("transform", [&] { return transform_part(in.part, in.tol); });
      auto ms = stage("match", [&] { return match_all(tr, in.db, in.tools); });
      emit(o, dump(matches_document(in.part.id, ms)), out);
      return Success;
    }
    if (plan->parsed()) {
      auto r = run_pipeline(load_inputs(o));
      emit(o, o.format == "text" ? r.document.text : dump(r.document.data), out);
      if (!r.plan.complete()) {
        err << "plan incomplete: " << r.plan.unmatched.size() << " unmatched, " << r.plan.inaccessible.size()
            << " inaccessible\n";
        return Infeasible;
      }
      return Success;
    }
    if (audit->parsed()) {
      auto rep = audit_database(load_db(o));
      emit(o, dump(to_json(rep)), out);
      return rep.empty() ? Success : ValidationFindings;
    }
    if (whatif->parsed()) {
      auto db = load_db(o);
      const auto* ose = db.ose(o.ose);
      if (!ose) throw InputError("--ose: no such OSE " + o.ose);
      std::vector<VaryField> vary;
      for (const auto& v : o.vary) {
        auto f = vary_field_from_string(v);
        if (!f) throw InputError("--vary: unknown field \"" + v + "\"");
        vary.push_back(*f);
      }
      if (vary.empty()) vary = {VaryField::MfgType, VaryField::Mode, VaryField::Tmc};
      emit(o, dump({{"ose", o.ose}, {"variants", to_json(what_if_expand(*ose, db, vary))}}), out);
      return Success;
    }
    if (report->parsed()) {
      if (o.counts.empty() == o.part.empty()) throw InputError("report: give exactly one of --counts or --part");
      SynthesisTable table;
      if (!o.counts.empty()) {
        auto counts = parse_counts(o.counts);
        long total = 0;
        for (const auto& [t, n] : counts) total += n;
        table = report_statistics(counts, total);
      } else {
        auto part = load_part(o);
        auto tol = load_tolerances(o);
        table = report_statistics(stage("transform", [&] { return transform_part(part, tol); }).counts);
      }
      emit(o, o.format == "text" ? render_text(table) : dump(to_json(table)), out);
      return Success;
    }
    if (srv->parsed()) return serve(o, err);
  } catch (const ValidationError& e) {
    out << dump(to_json(e.report));
    err << "error: validation findings\n";
    return ValidationFindings;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return InputFailure;
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return Infeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return InputFailure;
  }
  return InputFailure;
}

}  // namespace capp::cli
