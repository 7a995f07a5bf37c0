#include "cli_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cli {

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

long parse_int(const std::string& text, const std::string& where) {
  long v = 0;
  const char* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || text.empty()) throw ConfigError(where + ": malformed integer '" + text + "'");
  return v;
}

double parse_number(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError(where + ": malformed number '" + text + "'");
  }
  return v;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::integer: return "an integer";
    case Kind::number: return "a number";
    case Kind::string: return "a string";
    case Kind::boolean: return "a boolean";
    case Kind::int_list: return "a list of integers";
    case Kind::string_list: return "a list of strings";
  }
  return "a value";
}

}  // namespace

std::string file_key(const std::string& name) {
  std::string k = name;
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

ParamSet& ParamSet::add(std::string name, Kind kind, json def, std::string help) {
  slots_.push_back({Param{std::move(name), kind, std::move(def), std::move(help)}, {}, false, nullptr});
  return *this;
}

void ParamSet::attach(CLI::App& app) {
  app.add_option("--config", config_path_, "JSON config file; flags take precedence over its values");
  for (auto& s : slots_) {
    const std::string flag = "--" + s.param.name;
    std::string help = s.param.help;
    if (!s.param.def.is_null()) help += " [default: " + s.param.def.dump() + "]";
    if (s.param.kind == Kind::boolean) {
      s.opt = app.add_flag(flag, s.flag_bool, help);
    } else {
      s.opt = app.add_option(flag, s.raw, help);
    }
  }
}

json ParamSet::parse_flag(const Slot& s) const {
  const std::string where = "--" + s.param.name;
  switch (s.param.kind) {
    case Kind::integer: return parse_int(s.raw, where);
    case Kind::number: return parse_number(s.raw, where);
    case Kind::string: return s.raw;
    case Kind::boolean: return s.flag_bool;
    case Kind::int_list: {
      json arr = json::array();
      for (const auto& item : split_commas(s.raw)) arr.push_back(parse_int(item, where));
      return arr;
    }
    case Kind::string_list: {
      json arr = json::array();
      for (const auto& item : split_commas(s.raw)) arr.push_back(item);
      return arr;
    }
  }
  return nullptr;
}

void ParamSet::check_file_value(const Param& p, const json& v) const {
  const std::string where = "$." + file_key(p.name);
  bool ok = false;
  switch (p.kind) {
    case Kind::integer: ok = v.is_number_integer(); break;
    case Kind::number: ok = v.is_number(); break;
    case Kind::string: ok = v.is_string(); break;
    case Kind::boolean: ok = v.is_boolean(); break;
    case Kind::int_list:
      ok = v.is_array();
      for (const auto& e : v) ok = ok && e.is_number_integer();
      break;
    case Kind::string_list:
      ok = v.is_array();
      for (const auto& e : v) ok = ok && e.is_string();
      break;
  }
  if (!ok && !v.is_null()) throw ConfigError(where + ": expected " + kind_name(p.kind) + ", got " + v.dump());
}

json ParamSet::resolve() {
  json file = json::object();
  if (!config_path_.empty()) {
    std::ifstream in(config_path_);
    if (!in) throw ConfigError("cannot read config file " + config_path_);
    try {
      in >> file;
    } catch (const json::parse_error& e) {
      throw ConfigError(config_path_ + ": " + e.what());
    }
    if (!file.is_object()) throw ConfigError(config_path_ + ": top level must be an object");
  }

  std::map<std::string, const Param*> known;
  for (const auto& s : slots_) known[file_key(s.param.name)] = &s.param;
  for (const auto& [key, value] : file.items()) {
    if (key == "provenance" || key == "notes") continue;  // written by the echo, ignored on input
    if (key == "subcommand") {
      if (value != command_) throw ConfigError("$.subcommand: file is for '" + value.dump() + "', not '" + command_ + "'");
      continue;
    }
    auto it = known.find(key);
    if (it == known.end()) throw ConfigError("$." + key + ": unknown key for '" + command_ + "'");
    check_file_value(*it->second, value);
  }

  json out = json::object();
  json provenance = json::object();
  json notes = json::array();
  for (const auto& s : slots_) {
    const std::string key = file_key(s.param.name);
    const bool from_flag = s.opt && s.opt->count() > 0;
    const bool in_file = file.contains(key) && !file[key].is_null();
    if (from_flag) {
      out[key] = parse_flag(s);
      provenance[key] = "flag";
      if (in_file && file[key] != out[key]) {
        notes.push_back(key + ": flag value " + out[key].dump() + " overrides file value " + file[key].dump());
      }
    } else if (in_file) {
      out[key] = file[key];
      provenance[key] = "file";
    } else {
      out[key] = s.param.def;
      provenance[key] = "default";
    }
    if (key == "seed" && !from_flag) {
      if (const char* env = std::getenv("ASPADMM_SEED"); env && *env) {
        const long seed = parse_int(env, "ASPADMM_SEED");
        if (out[key] != json(seed)) notes.push_back("seed: ASPADMM_SEED=" + std::string(env) + " overrides " + out[key].dump());
        out[key] = seed;
        provenance[key] = "env";
      }
    }
  }

  echo_ = out;
  echo_["subcommand"] = command_;
  echo_["provenance"] = provenance;
  echo_["notes"] = notes;
  return out;
}

bool has(const json& cfg, const std::string& key) { return cfg.contains(key) && !cfg.at(key).is_null(); }

long get_int(const json& cfg, const std::string& key) { return cfg.at(key).get<long>(); }
double get_num(const json& cfg, const std::string& key) { return cfg.at(key).get<double>(); }
std::string get_str(const json& cfg, const std::string& key) { return cfg.at(key).get<std::string>(); }
bool get_bool(const json& cfg, const std::string& key) { return cfg.at(key).get<bool>(); }
std::vector<long> get_int_list(const json& cfg, const std::string& key) { return cfg.at(key).get<std::vector<long>>(); }
std::vector<std::string> get_str_list(const json& cfg, const std::string& key) {
  return cfg.at(key).get<std::vector<std::string>>();
}

}  // namespace cli
