#pragma once

// Parameter resolution for the command-line runner: flag > config file > default,
// with ASPADMM_SEED overriding the file and default seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cli {

using nlohmann::json;

// Bad configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { integer, number, string, boolean, int_list, string_list };

struct Param {
  std::string name;  // flag is --name, file key is name with '-' replaced by '_'
  Kind kind;
  json def;  // null means "unset"
  std::string help;
};

class ParamSet {
 public:
  explicit ParamSet(std::string command) : command_(std::move(command)) {}

  ParamSet& add(std::string name, Kind kind, json def, std::string help);
  // Registers --name for every parameter plus --config on the subcommand.
  void attach(CLI::App& app);

  // Resolved values keyed by file key, with provenance recorded.
  json resolve();
  const json& echo() const { return echo_; }

 private:
  struct Slot {
    Param param;
    std::string raw;
    bool flag_bool = false;
    CLI::Option* opt = nullptr;
  };

  json parse_flag(const Slot& s) const;
  void check_file_value(const Param& p, const json& v) const;

  std::string command_;
  std::vector<Slot> slots_;
  std::string config_path_;
  json echo_;
};

std::string file_key(const std::string& name);

// Typed accessors on a resolved object.
long get_int(const json& cfg, const std::string& key);
double get_num(const json& cfg, const std::string& key);
std::string get_str(const json& cfg, const std::string& key);
bool get_bool(const json& cfg, const std::string& key);
std::vector<long> get_int_list(const json& cfg, const std::string& key);
std::vector<std::string> get_str_list(const json& cfg, const std::string& key);
bool has(const json& cfg, const std::string& key);

}  // namespace cli
