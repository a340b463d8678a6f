#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <tuple>

#include "support/common.hpp"
#include "support/oracles.hpp"

using namespace capp;
using namespace capp::test;
using namespace capp::oracle;

namespace {

FaceAttributes plane_face() {
  FaceAttributes a;
  a.id = "F";
  a.geometry_type = GeometryType::Plan;
  a.openness = Openness::Open;
  a.access = {{Vec3::UnitZ(), AccessKind::SingleVector, true}};
  a.end_accessibility = 12;
  a.flank_accessibility = 30;
  a.global_accessibility = 50;
  a.depth = 0;
  a.min_fillet_radius = 2;
  a.potential_mfg_types = {MfgType::EndManufacturing};
  return a;
}

CuttingSet tool(double d, double length, double r) {
  CuttingSet t;
  t.id = "T";
  t.diameter = d;
  t.cutting_length = std::min(length, 20.0);
  t.tool_length = length;
  t.end_radius = r;
  t.cutting_material = "Carbide";
  t.capabilities = {{MfgType::EndManufacturing}, {Mode::Roughing}, {"TMC1"}};
  for (auto n : kConditionNames) t.conditions[std::string(n)] = {100, 200};
  return t;
}

/// Checks in the style of the end-milling OSE.
OSE end_ose() {
  OSE o;
  o.id = "OSE";
  o.compliance_checks = {make_check("tool.diameter", Op::Lt, ref("face.end_accessibility")),
                         make_check("tool.tool_length", Op::Gt, ref("face.global_accessibility")),
                         make_check("face.min_fillet_radius", Op::Ge, ref("tool.end_radius"))};
  return o;
}

GeometryFamily feat1_family() {
  GeometryFamily f;
  f.id = "FEAT-1";
  f.required_type = GeometryType::Plan;
  f.checks = {make_check("face.potential_mfg_types", Op::ContainsAny, AnyOf{{"EndManufacturing"}}),
              make_check("face.access_kind", Op::Eq, ConstOperand{std::string("SingleVector")}),
              make_check("face.access_compulsory", Op::Eq, ConstOperand{true})};
  return f;
}

ExtendedCuttingConditions end_roughing_qmax() {
  ExtendedCuttingConditions c;
  c.id = "C";
  c.mfg_type = MfgType::EndManufacturing;
  c.mode = Mode::Roughing;
  c.allowed_tmcs = {"TMC1", "TMC3"};
  c.priority = Priority::Qmax;
  return c;
}

bool eval(const Check& c, const ValueMap& face, const ValueMap& tool) {
  ValueBindings b{&face, &tool, nullptr};
  return eval_check(c, b);
}

StringList ids(const std::vector<Candidate>& cs) {
  StringList out;
  for (const auto& c : cs) out.push_back(c.id);
  return out;
}

TransformResult carter_attrs() { return transform_part(synthetic::carter()); }

FaceMatch face_match(const FaceAttributes& a, const OSEDatabase& db, const std::vector<CuttingSet>& tools) {
  FaceMatch fm;
  fm.face = a.id;
  fm.candidates = match_face(a, db, tools);
  select_default(fm);
  return fm;
}

CustomPayload payload_for(const std::string& tool_id, const CuttingSet& t, double feed) {
  CustomPayload p;
  p.cutting_set = tool_id;
  for (const auto& [name, iv] : t.conditions) p.conditions[name] = iv.mid();
  p.conditions["feed_rate"] = feed;
  return p;
}

const CuttingSet& find_tool(const std::vector<CuttingSet>& tools, const std::string& id) {
  return *std::find_if(tools.begin(), tools.end(), [&](const CuttingSet& t) { return t.id == id; });
}

}  // namespace

// ---------------------------------------------------------------- check evaluation

TEST_CASE("tool diameter below end accessibility passes") {
  const auto c = make_check("tool.diameter", Op::Lt, ref("face.end_accessibility"));
  CHECK(eval(c, {{"end_accessibility", 12.0}}, {{"diameter", 10.0}}));
  CHECK_FALSE(eval(c, {{"end_accessibility", 12.0}}, {{"diameter", 12.0}}));
  CHECK_FALSE(eval(c, {{"end_accessibility", 12.0}}, {{"diameter", 14.0}}));
}

TEST_CASE("TMC membership is contains_any") {
  const auto c = make_check("tool.tmcs", Op::ContainsAny, AnyOf{{"TMC1", "TMC3"}});
  CHECK(eval(c, {}, {{"tmcs", StringList{"TMC1", "TMC2"}}}));
  CHECK_FALSE(eval(c, {}, {{"tmcs", StringList{"TMC2"}}}));
  CHECK(eval(c, {}, {{"tmcs", StringList{"TMC3"}}}));
}

TEST_CASE("contains_all requires a superset") {
  const auto c = make_check("tool.tmcs", Op::ContainsAll, AllOf{{"TMC1", "TMC3"}});
  CHECK(eval(c, {}, {{"tmcs", StringList{"TMC3", "TMC2", "TMC1"}}}));
  CHECK_FALSE(eval(c, {}, {{"tmcs", StringList{"TMC1", "TMC2"}}}));
}

TEST_CASE("scalar operators compare numerically") {
  const ValueMap tool{{"diameter", 10.0}};
  CHECK(eval(make_check("tool.diameter", Op::Le, ConstOperand{10.0}), {}, tool));
  CHECK(eval(make_check("tool.diameter", Op::Ge, ConstOperand{10.0}), {}, tool));
  CHECK_FALSE(eval(make_check("tool.diameter", Op::Gt, ConstOperand{10.0}), {}, tool));
  CHECK(eval(make_check("tool.diameter", Op::Eq, ConstOperand{10.0}), {}, tool));
}

TEST_CASE("unbound namespace is a binding error, not a failure") {
  const auto a = plane_face();
  Bindings b(&a);
  CHECK_THROWS_AS(eval_check(make_check("tool.diameter", Op::Lt, ref("face.end_accessibility")), b), BindingError);
  CHECK_THROWS_AS(eval_check(make_check("face.colour", Op::Eq, ConstOperand{1.0}), b), BindingError);
}

// ---------------------------------------------------------------- family membership

TEST_CASE("single compulsory end face belongs to the Feat-1 family") {
  auto a = plane_face();
  CHECK(face_in_family(a, feat1_family()));
  a.access = {{Vec3::UnitZ(), AccessKind::TwoOppositeVectors, false}, {-Vec3::UnitZ(), AccessKind::TwoOppositeVectors, false}};
  CHECK_FALSE(face_in_family(a, feat1_family()));
}

TEST_CASE("geometry type mismatch fails regardless of checks") {
  auto a = plane_face();
  a.geometry_type = GeometryType::Cylinder;
  GeometryFamily open = feat1_family();
  open.checks.clear();
  CHECK_FALSE(face_in_family(a, open));
  Trace trace;
  CHECK_FALSE(face_in_family(a, feat1_family(), &trace));
  REQUIRE(trace.size() == 1);
  CHECK_FALSE(trace[0].passed);
}

// ---------------------------------------------------------------- geometric compliance

TEST_CASE("geometric compliance of an end mill") {
  const auto a = plane_face();
  CHECK(geometric_compliance(a, tool(10, 60, 2), end_ose()));
  CHECK_FALSE(geometric_compliance(a, tool(10, 60, 3), end_ose()));
  CHECK(geometric_compliance(a, tool(10, 60, 2), end_ose()));
  auto fillet_exactly = a;
  fillet_exactly.min_fillet_radius = 2;
  CHECK(geometric_compliance(fillet_exactly, tool(10, 60, 2), end_ose()));
  CHECK_FALSE(geometric_compliance(a, tool(10, 50, 2), end_ose()));
  CHECK_FALSE(geometric_compliance(a, tool(12, 60, 2), end_ose()));
}

TEST_CASE("unbounded fillet radius accepts every end radius") {
  auto a = plane_face();
  a.min_fillet_radius = std::numeric_limits<double>::infinity();
  CHECK(geometric_compliance(a, tool(10, 60, 8), end_ose()));
}

TEST_CASE("envelope must reach the bottom of the face") {
  auto a = plane_face();
  a.depth = 15;
  OSE no_checks;
  no_checks.id = "O";
  CHECK(geometric_compliance(a, tool(10, 65, 1), no_checks));
  CHECK_FALSE(geometric_compliance(a, tool(10, 64.9, 1), no_checks));
  Trace trace;
  (void)geometric_compliance(a, tool(10, 64.9, 1), no_checks, &trace);
  REQUIRE(trace.size() == 1);
  CHECK(trace[0].check == kEnvelopeCheck);
}

// ---------------------------------------------------------------- manufacturing compliance

TEST_CASE("manufacturing compliance returns the configuration priority") {
  const auto cfg = end_roughing_qmax();
  auto t = tool(10, 60, 1);
  auto mc = manufacturing_compliance(t, cfg);
  CHECK(mc.passed);
  CHECK(mc.priority == Priority::Qmax);

  t.capabilities.modes = {Mode::Finishing};
  CHECK_FALSE(manufacturing_compliance(t, cfg).passed);

  t.capabilities.modes = {Mode::Roughing, Mode::Finishing};
  CHECK(manufacturing_compliance(t, cfg).passed);

  t.capabilities.tmcs = {"TMC2"};
  CHECK_FALSE(manufacturing_compliance(t, cfg).passed);
  t.capabilities.tmcs = {"TMC3"};
  CHECK(manufacturing_compliance(t, cfg).passed);

  t.capabilities.mfg_types = {MfgType::FlankManufacturing};
  CHECK_FALSE(manufacturing_compliance(t, cfg).passed);
}

// ---------------------------------------------------------------- match_face

TEST_CASE("match_face equals the brute-force enumeration on every carter face") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  const auto tr = carter_attrs();
  std::size_t total = 0, faces_with_several = 0;
  for (const auto& a : tr.faces) {
    INFO(a.id);
    const auto got = match_face(a, db, tools);
    const auto want = brute_force_matches(a, db, tools);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == want[i].id);
      CHECK(got[i].feasible == want[i].feasible);
      CHECK(got[i].rank == int(i) + 1);
      CHECK(got[i].face == a.id);
    }
    total += got.size();
    faces_with_several += got.size() > 1;
  }
  CHECK(total > 24);
  CHECK(faces_with_several > 5);
}

TEST_CASE("match_face equals the brute-force enumeration on every shipped fixture") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  for (const auto& fx : synthetic::shipped_fixtures()) {
    if (fx.part.faces.size() > 100) continue;
    const auto tr = transform_part(fx.part);
    for (const auto& a : tr.faces) {
      INFO(fx.file << " " << a.id);
      auto want = brute_force_matches(a, db, tools);
      StringList want_ids;
      for (const auto& w : want) want_ids.push_back(w.id);
      CHECK(ids(match_face(a, db, tools)) == want_ids);
    }
  }
}

TEST_CASE("fillet faces of the carter match one OSE and one tool") {
  const auto tr = carter_attrs();
  for (const char* id : {"F23", "F24"}) {
    auto cs = match_face(*tr.find(id), seed_db(), seed_tools());
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].id == "OSE-07/T-EF-12L");
  }
}

TEST_CASE("empty tool database gives no candidates") {
  const auto db = seed_db();
  for (const auto& a : carter_attrs().faces) CHECK(match_face(a, db, {}).empty());
}

TEST_CASE("removing a tool never adds a candidate") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  const auto tr = carter_attrs();
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    auto subset = tools;
    std::shuffle(subset.begin(), subset.end(), rng);
    subset.resize(std::uniform_int_distribution<std::size_t>(0, tools.size() - 1)(rng));
    for (const auto& a : tr.faces) {
      auto small = ids(match_face(a, db, subset));
      auto full = ids(match_face(a, db, tools));
      std::set<std::string> fs(full.begin(), full.end());
      for (const auto& id : small) CHECK(fs.count(id) == 1);
    }
  }
}

TEST_CASE("every candidate trace covers all checks") {
  const auto db = seed_db();
  for (const auto& a : carter_attrs().faces)
    for (const auto& c : match_face(a, db, seed_tools())) {
      const auto& ose = *db.ose(c.ose);
      const auto& fam = *db.family(ose.family);
      std::set<std::string> seen;
      for (const auto& e : c.trace) {
        seen.insert(e.check);
        CHECK(e.passed);
      }
      for (const auto& chk : fam.checks) CHECK(seen.count(chk.text()) == 1);
      for (const auto& chk : ose.compliance_checks) CHECK(seen.count(chk.text()) == 1);
      CHECK(seen.count(std::string(kEnvelopeCheck)) == 1);
      std::size_t mfg = 0;
      for (const auto& e : c.trace) mfg += e.check.rfind("tool.mfg_types", 0) == 0 || e.check.rfind("tool.modes", 0) == 0 ||
                                         e.check.rfind("tool.tmcs", 0) == 0;
      CHECK(mfg == 3);
      CHECK(c.trace.size() == 1 + fam.checks.size() + ose.compliance_checks.size() + 1 + 3);
    }
}

TEST_CASE("matching is deterministic and independent of database order") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  const auto tr = carter_attrs();
  auto shuffled_db = db;
  auto shuffled_tools = tools;
  std::mt19937_64 rng(73);
  std::shuffle(shuffled_db.oses.begin(), shuffled_db.oses.end(), rng);
  std::shuffle(shuffled_tools.begin(), shuffled_tools.end(), rng);
  for (const auto& a : tr.faces) {
    auto first = match_face(a, db, tools);
    CHECK(match_face(a, db, tools) == first);
    CHECK(ids(match_face(a, shuffled_db, shuffled_tools)) == ids(first));
  }
}

// ---------------------------------------------------------------- selection

TEST_CASE("level 1 selects the best feasible candidate") {
  const auto tr = carter_attrs();
  for (const auto& a : tr.faces) {
    auto fm = face_match(a, seed_db(), seed_tools());
    if (fm.candidates.empty()) {
      CHECK(fm.selected.empty());
      continue;
    }
    auto first_feasible = std::find_if(fm.candidates.begin(), fm.candidates.end(), [](auto& c) { return c.feasible; });
    REQUIRE(first_feasible != fm.candidates.end());
    CHECK(fm.selected == first_feasible->id);
    CHECK(std::count_if(fm.candidates.begin(), fm.candidates.end(), [](auto& c) { return c.selected; }) == 1);
  }
}

TEST_CASE("level 2 moves the selection and keeps alternatives") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  const auto tr = carter_attrs();
  const auto it = std::find_if(tr.faces.begin(), tr.faces.end(),
                               [&](const FaceAttributes& a) { return match_face(a, db, tools).size() >= 3; });
  REQUIRE(it != tr.faces.end());
  auto fm = face_match(*it, db, tools);
  const auto before = ids(fm.candidates);
  select_candidate(fm, 2, fm.candidates[2].id, std::nullopt, db, tools);
  CHECK(fm.level == 2);
  CHECK(fm.selected == before[2]);
  CHECK(ids(fm.candidates) == before);
  CHECK(fm.candidates[2].selected);
  CHECK(fm.candidates[2].origin == Origin::ExpertChoice);
  CHECK(std::count_if(fm.candidates.begin(), fm.candidates.end(), [](auto& c) { return c.selected; }) == 1);

  CHECK_THROWS_WITH(select_candidate(fm, 2, "OSE-99/T-NONE", std::nullopt, db, tools),
                    Catch::Matchers::ContainsSubstring("no such alternative"));
  CHECK(fm.selected == before[2]);

  select_candidate(fm, 1, "", std::nullopt, db, tools);
  CHECK(fm.selected == before[0]);
  CHECK(fm.level == 1);
}

TEST_CASE("level 3 flags out-of-range values and rejects malformed payloads") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  const auto tr = carter_attrs();
  auto fm = face_match(*tr.find("F23"), db, tools);
  const auto& t = find_tool(tools, "T-EF-12L");
  const TMC& tmc2 = *db.tmc("TMC2");

  auto inside = payload_for("T-EF-12L", t, 1000);
  inside.ose = "OSE-07";
  select_candidate(fm, 3, "", inside, db, tools);
  REQUIRE(fm.custom);
  CHECK(fm.level == 3);
  CHECK(fm.selected == "custom");
  CHECK(fm.custom->origin == Origin::ExpertCustom);
  CHECK(fm.custom->custom_conditions->warnings.empty());
  CHECK(fm.candidates.size() == 1);

  const double above = tmc2.constraints.at("feed_rate").max + 100;
  auto outside = payload_for("T-EF-12L", t, above);
  outside.ose = "OSE-07";
  select_candidate(fm, 3, "", outside, db, tools);
  const auto& w = fm.custom->custom_conditions->warnings;
  const bool tool_range_violated = !t.conditions.at("feed_rate").contains(above);
  CHECK(std::count(w.begin(), w.end(), "feed_rate outside TMC2 constraint") == 1);
  CHECK(std::count(w.begin(), w.end(), "feed_rate outside cutting set range") == int(tool_range_violated));
  CHECK(fm.custom->custom_conditions->values.at("feed_rate") == above);

  auto missing = outside;
  missing.conditions.erase("advance_z");
  CHECK_THROWS_WITH(select_candidate(fm, 3, "", missing, db, tools),
                    Catch::Matchers::ContainsSubstring("invalid custom configuration"));
  auto unknown_tool = outside;
  unknown_tool.cutting_set = "T-NONE";
  CHECK_THROWS_WITH(select_candidate(fm, 3, "", unknown_tool, db, tools),
                    Catch::Matchers::ContainsSubstring("invalid custom configuration"));
  CHECK_THROWS_WITH(select_candidate(fm, 3, "", std::nullopt, db, tools),
                    Catch::Matchers::ContainsSubstring("invalid custom configuration"));
  CHECK(fm.custom->custom_conditions->values.at("feed_rate") == above);
}

TEST_CASE("selections survive rematching while their candidate exists") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  const auto tr = carter_attrs();
  const auto it = std::find_if(tr.faces.begin(), tr.faces.end(),
                               [&](const FaceAttributes& a) { return match_face(a, db, tools).size() >= 2; });
  REQUIRE(it != tr.faces.end());
  auto fm = face_match(*it, db, tools);
  const auto chosen = fm.candidates[1];
  select_candidate(fm, 2, chosen.id, std::nullopt, db, tools);

  auto again = rematch(fm, match_face(*it, db, tools), db, tools);
  CHECK(again.level == 2);
  CHECK(again.selected == chosen.id);
  CHECK(again.notices.empty());

  auto fewer = tools;
  fewer.erase(std::remove_if(fewer.begin(), fewer.end(), [&](const CuttingSet& t) { return t.id == chosen.cutting_set; }),
              fewer.end());
  auto reverted = rematch(fm, match_face(*it, db, fewer), db, fewer);
  CHECK(reverted.level == 1);
  CHECK(reverted.selected != chosen.id);
  REQUIRE(reverted.notices.size() == 1);
  CHECK(reverted.notices[0].find(chosen.id) != std::string::npos);
}

TEST_CASE("custom selection reverts when its tool disappears") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  auto fm = face_match(*carter_attrs().find("F23"), db, tools);
  select_candidate(fm, 3, "", payload_for("T-EF-12L", find_tool(tools, "T-EF-12L"), 1000), db, tools);
  CHECK(rematch(fm, fm.candidates, db, tools).level == 3);
  std::vector<CuttingSet> none;
  auto r = rematch(fm, {}, db, none);
  CHECK(r.level == 1);
  CHECK(r.selected.empty());
  CHECK(r.notices.size() == 1);
}

// ---------------------------------------------------------------- cutting conditions

TEST_CASE("Qmax conditions dominate Default and stay in range") {
  const auto db = seed_db();
  for (const auto& t : seed_tools())
    for (const auto& id : t.capabilities.tmcs) {
      INFO(t.id << " " << id);
      const TMC* tmc = db.tmc(id);
      auto q = optimize_conditions(Priority::Qmax, t, tmc);
      auto d = optimize_conditions(Priority::Default, t, tmc);
      for (auto n : kConditionNames) {
        const std::string name(n);
        CHECK(q.values.at(name) >= d.values.at(name));
        CHECK(q.sources.at(name).contains(q.values.at(name)));
        CHECK(d.sources.at(name).contains(d.values.at(name)));
        CHECK(t.conditions.at(name).contains(q.values.at(name)));
        if (tmc->constraints.count(name)) CHECK(tmc->constraints.at(name).contains(q.values.at(name)));
      }
    }
}

TEST_CASE("feed rate intersects the tool range with the TMC constraint") {
  const auto db = seed_db();
  const auto tools = seed_tools();
  const auto& t = find_tool(tools, "T-ER-10");
  auto q = optimize_conditions(Priority::Qmax, t, db.tmc("TMC1"));
  CHECK(q.values.at("feed_rate") == Catch::Approx(3500));
  CHECK(q.sources.at("feed_rate").min == Catch::Approx(800));
  auto d = optimize_conditions(Priority::Default, t, db.tmc("TMC1"));
  CHECK(d.values.at("feed_rate") == Catch::Approx((800.0 + 3500.0) / 2));
}

TEST_CASE("disjoint ranges are infeasible") {
  auto t = tool(10, 60, 1);
  t.conditions["feed_rate"] = {100, 200};
  TMC tmc;
  tmc.id = "TMC-X";
  tmc.constraints["feed_rate"] = {800, 4000};
  try {
    (void)optimize_conditions(Priority::Qmax, t, &tmc);
    FAIL("expected InfeasibleConditions");
  } catch (const InfeasibleConditions& e) {
    CHECK(e.parameter() == "feed_rate");
  }
}
