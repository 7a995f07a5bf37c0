#include "aspadmm/apps.hpp"
#include "aspadmm/error.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

namespace aspadmm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> to_list(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec from_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(where + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(where + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw Error("unknown key " + where + "." + key);
  }
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw Error("missing key " + where + "." + key);
  return j.at(key);
}

double number(const json& j, const std::string& key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) throw Error(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

fs::path sibling(const std::string& path, const std::string& name) { return fs::path(path).parent_path() / name; }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
  if (!j.is_object() || j.value("kind", std::string()) != kind) {
    throw Error(path + ": not a " + kind + " instance (missing or wrong \"kind\")");
  }
  return j;
}

json penalty_json(const DcPenalty& p) {
  return {{"kind", p.kind == DcPenalty::Kind::mcp ? "mcp" : "scad"}, {"gamma1", p.gamma1}, {"gamma2", p.gamma2}};
}

DcPenalty penalty_from(const json& j, const std::string& where) {
  reject_unknown(j, {"kind", "gamma1", "gamma2"}, where);
  const std::string kind = need(j, "kind", where).get<std::string>();
  if (kind == "mcp") return DcPenalty::mcp(number(j, "gamma1", where));
  if (kind == "scad") return DcPenalty::scad(number(j, "gamma1", where), number(j, "gamma2", where));
  throw Error(where + ".kind: expected \"mcp\" or \"scad\"");
}

}  // namespace

void save_lasso_instance(const std::string& path, const LassoInstance& inst) {
  const std::string a_name = stem_of(path) + ".A.txt";
  write_matrix_file(sibling(path, a_name).string(), inst.a);
  json j = {{"kind", "lasso"}, {"seed", inst.seed}, {"lambda", inst.lambda}, {"A", a_name}, {"b", to_list(inst.b)}};
  if (inst.certificate) j["certificate"] = {{"x", to_list(inst.certificate->x)}, {"z", to_list(inst.certificate->z)}};
  write_json(path, j);
}

LassoInstance load_lasso_instance(const std::string& path) {
  const json j = read_json(path, "lasso");
  reject_unknown(j, {"kind", "seed", "lambda", "A", "b", "certificate"}, "$");
  LassoInstance inst;
  inst.seed = need(j, "seed", "$").get<std::uint64_t>();
  inst.lambda = number(j, "lambda", "$");
  inst.a = read_matrix_file(sibling(path, need(j, "A", "$").get<std::string>()).string());
  inst.b = from_list(need(j, "b", "$"), "$.b");
  if (j.contains("certificate")) {
    const json& c = j.at("certificate");
    reject_unknown(c, {"x", "z"}, "$.certificate");
    inst.certificate = LassoCertificate{from_list(need(c, "x", "$.certificate"), "$.certificate.x"),
                                        from_list(need(c, "z", "$.certificate"), "$.certificate.z")};
  }
  if (inst.b.size() != inst.a.rows()) throw DimensionError("$.b", inst.a.rows(), inst.b.size());
  return inst;
}

void save_mixed_instance(const std::string& path, const MixedSparseInstance& inst) {
  const std::string a_name = stem_of(path) + ".A.txt";
  write_matrix_file(sibling(path, a_name).string(), inst.a);
  json groups = json::array();
  for (const auto& g : inst.groups) groups.push_back(g);
  json j = {{"kind", "mixed"},         {"seed", inst.seed},       {"A", a_name},
            {"b", to_list(inst.b)},    {"groups", groups},        {"lambda1", inst.lambda1},
            {"lambda2", inst.lambda2}, {"rho1", inst.rho1},       {"rho2", inst.rho2},
            {"a", inst.a_param},       {"x_true", to_list(inst.x_true)}};
  if (inst.eta) j["eta"] = *inst.eta;
  write_json(path, j);
}

MixedSparseInstance load_mixed_instance(const std::string& path) {
  const json j = read_json(path, "mixed");
  reject_unknown(j, {"kind", "seed", "A", "b", "groups", "lambda1", "lambda2", "rho1", "rho2", "a", "eta", "x_true"},
                 "$");
  MixedSparseInstance inst;
  inst.seed = need(j, "seed", "$").get<std::uint64_t>();
  inst.a = read_matrix_file(sibling(path, need(j, "A", "$").get<std::string>()).string());
  inst.b = from_list(need(j, "b", "$"), "$.b");
  for (const auto& g : need(j, "groups", "$")) inst.groups.push_back(g.get<std::vector<Eigen::Index>>());
  inst.lambda1 = number(j, "lambda1", "$");
  inst.lambda2 = number(j, "lambda2", "$");
  inst.rho1 = number(j, "rho1", "$");
  inst.rho2 = number(j, "rho2", "$");
  inst.a_param = number(j, "a", "$");
  if (j.contains("eta")) inst.eta = number(j, "eta", "$");
  if (j.contains("x_true")) inst.x_true = from_list(j.at("x_true"), "$.x_true");
  inst.validate();
  return inst;
}

void save_rtc_instance(const std::string& path, const RtcInstance& inst) {
  const std::string stem = stem_of(path);
  write_tensor_file(sibling(path, stem + ".X.bin").string(), inst.x_true);
  write_tensor_file(sibling(path, stem + ".Y.bin").string(), inst.observed);
  const json j = {{"kind", "rtc"},
                  {"seed", inst.seed},
                  {"dims", {inst.x_true.n1(), inst.x_true.n2(), inst.x_true.n3()}},
                  {"x_true", stem + ".X.bin"},
                  {"observed", stem + ".Y.bin"},
                  {"omega", inst.omega},
                  {"sr", inst.sr},
                  {"alpha", inst.alpha},
                  {"j1", inst.j1},
                  {"j2", inst.j2},
                  {"lambda", inst.lambda},
                  {"eta", inst.eta},
                  {"penalty_g", penalty_json(inst.penalty_g)},
                  {"penalty_m", penalty_json(inst.penalty_m)}};
  write_json(path, j);
}

RtcInstance load_rtc_instance(const std::string& path) {
  const json j = read_json(path, "rtc");
  reject_unknown(j, {"kind", "seed", "dims", "x_true", "observed", "omega", "sr", "alpha", "j1", "j2", "lambda", "eta",
                     "penalty_g", "penalty_m"},
                 "$");
  RtcInstance inst;
  inst.seed = need(j, "seed", "$").get<std::uint64_t>();
  inst.x_true = read_tensor_file(sibling(path, need(j, "x_true", "$").get<std::string>()).string());
  inst.observed = read_tensor_file(sibling(path, need(j, "observed", "$").get<std::string>()).string());
  const auto dims = need(j, "dims", "$").get<std::vector<Eigen::Index>>();
  if (dims.size() != 3 || dims[0] != inst.x_true.n1() || dims[1] != inst.x_true.n2() || dims[2] != inst.x_true.n3()) {
    throw Error("$.dims does not match the stored tensor");
  }
  inst.omega = need(j, "omega", "$").get<std::vector<Eigen::Index>>();
  inst.sr = number(j, "sr", "$");
  inst.alpha = number(j, "alpha", "$");
  inst.j1 = number(j, "j1", "$");
  inst.j2 = number(j, "j2", "$");
  inst.lambda = number(j, "lambda", "$");
  inst.eta = number(j, "eta", "$");
  inst.penalty_g = penalty_from(need(j, "penalty_g", "$"), "$.penalty_g");
  inst.penalty_m = penalty_from(need(j, "penalty_m", "$"), "$.penalty_m");
  inst.validate();
  return inst;
}

}  // namespace aspadmm
