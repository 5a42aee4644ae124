#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "upb/dynamics.hpp"
#include "upb/iomix.hpp"

namespace upb::app {

// Bad config: parse errors and field-level validation failures. Maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "section.key" -> value view of an INI file.
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& def) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double def) const;
  int integer(const std::string& key) const;
  int integer(const std::string& key, int def) const;
  // "re" or "re,im"
  cplx complex(const std::string& key, cplx def = 0) const;
  // "log(a,b,n)", "lin(a,b,n)" or "v1, v2, ..."; n may be omitted and then defaults to n_default
  std::vector<double> sweep(const std::string& key, int n_default) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return kv_; }
  const std::string& origin() const { return origin_; }
  std::string name() const { return str("experiment.name"); }

 private:
  std::map<std::string, std::string> kv_;
  std::string origin_;
};

struct RunOptions {
  std::string out_dir = "out";
  int workers = 0;  // 0: hardware concurrency
  std::optional<int> cutoff;
  std::optional<std::string> resolution;

  int worker_count() const;
};

// Effective settings after CLI overrides.
struct Settings {
  int cutoff = 6;
  int cutoff_limit = 24;
  bool paper = false;
  int workers = 1;
  int map_points() const { return paper ? 128 : 32; }
};

struct Table {
  std::string name;  // file stem
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;  // "name [unit]"
  std::vector<std::vector<double>> rows;
  std::vector<std::string> reasons;  // one per row when has_reason
  bool has_reason = false;

  void add(std::vector<double> row, std::string reason = {});
};

struct Certificate {
  bool applicable = true;
  std::string observable;
  int cutoff = 0;
  int basis_size = 0;
  double top_population = 0;
  double value = 0, value_next = 0;  // observable at cutoff and cutoff + 2
  double delta_next = 0;             // relative change
  bool converged = true;
};

struct ExperimentResult {
  std::vector<Table> tables;
  Certificate certificate;
  std::vector<std::string> warnings;
  nlohmann::ordered_json summary;  // headline numbers, echoed in the manifest
};

struct Experiment {
  std::string name;
  std::string description;
  std::vector<std::string> required;  // config keys
  std::function<void(const Config&, const Settings&, std::vector<std::string>&)> check;
  std::function<ExperimentResult(const Config&, const Settings&)> run;
};

const std::vector<Experiment>& experiments();
const Experiment* find_experiment(const std::string& name);

SystemParams system_from(const Config& c);
BathParams bath_from(const Config& c);
Settings settings_from(const Config& c, const RunOptions& opt);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> notes;  // derived quantities echoed back
  bool ok() const { return errors.empty(); }
};
ValidationReport validate(const Config& c, const RunOptions& opt = {});

// Applies f to 0..n-1 on a worker pool. Results go into caller-owned indexed slots.
void parallel_for(int n, int workers, const std::function<void(int)>& f);

// Serialization. Numbers are printed with fixed precision so that output bytes are reproducible.
std::string csv_text(const Table& t, const std::string& experiment);
std::string sha256_hex(const std::string& bytes);

struct RunOutcome {
  int exit_code = 0;
  nlohmann::ordered_json manifest;
};
// Validates, runs, and writes <out>/<table>.csv plus <out>/manifest.json.
RunOutcome run(const Config& c, const RunOptions& opt, std::ostream& log);

}  // namespace upb::app
