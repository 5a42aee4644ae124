#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "upb/app.hpp"

namespace upb::app {

namespace {

namespace pt = boost::property_tree;

// Keys accepted per section. [sweep] takes any name.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"experiment", {"name", "cutoff", "cutoff_limit", "resolution", "description"}},
      {"system",
       {"delta", "delta1", "delta2", "u", "u1", "u2", "j", "f1", "f2", "kappa1", "kappa2", "optimal"}},
      {"bath",
       {"n_th", "dephasing", "cascade_efficiency", "squeeze_r", "squeeze_theta", "squeeze_model",
        "squeeze_port"}},
      {"sweep", {}},
      {"target", {"n1", "u", "f_weak"}},
      {"tau", {"t_end", "points"}},
      {"pulse", {"f1", "f2", "sigma", "t0", "t_end", "points", "points_paper", "drive"}},
      {"gate", {"width", "center", "points"}},
      {"mixing", {"f0", "theta_in", "phi_in", "gamma0", "points", "choose"}},
      {"squeeze", {"r", "alpha", "n_max", "n_eff"}},
      {"jc", {"delta1", "delta2", "g", "kappa1", "kappa2", "f2", "kerr_cutoff"}},
  };
  return s;
}

std::string field(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) return key;
  return "[" + key.substr(0, dot) + "] " + key.substr(dot + 1);
}

double parse_double(const std::string& key, std::string s) {
  boost::algorithm::trim(s);
  double v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty())
    throw ConfigError(field(key) + " = '" + s + "': not a number");
  if (!std::isfinite(v)) throw ConfigError(field(key) + " = '" + s + "': not finite");
  return v;
}

std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  return parts;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Config c;
  c.origin_ = origin;
  // line numbers for field context
  std::map<std::string, int> line_of;
  {
    std::istringstream ls(text);
    std::string line, section;
    for (int n = 1; std::getline(ls, line); ++n) {
      boost::algorithm::trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find('=');
      if (eq != std::string::npos) line_of[section + "." + boost::algorithm::trim_copy(line.substr(0, eq))] = n;
    }
  }
  const auto& sch = schema();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(origin + ": key '" + section + "' outside any section");
    auto it = sch.find(section);
    if (it == sch.end()) throw ConfigError(origin + ": unknown section [" + section + "]");
    for (const auto& [key, val] : body) {
      const std::string full = section + "." + key;
      if (section != "sweep" && !it->second.count(key)) {
        const auto ln = line_of.find(full);
        throw ConfigError(origin + ":" + (ln == line_of.end() ? std::string("?") : std::to_string(ln->second)) +
                          ": unknown key " + field(full));
      }
      c.kv_[full] = val.get_value<std::string>();
    }
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

std::string Config::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError(field(key) + ": missing");
  return boost::algorithm::trim_copy(it->second);
}

std::string Config::str(const std::string& key, const std::string& def) const {
  return has(key) ? str(key) : def;
}

double Config::num(const std::string& key) const { return parse_double(key, str(key)); }

double Config::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

int Config::integer(const std::string& key) const {
  const double v = num(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(field(key) + ": expected an integer");
  return int(v);
}

int Config::integer(const std::string& key, int def) const { return has(key) ? integer(key) : def; }

cplx Config::complex(const std::string& key, cplx def) const {
  if (!has(key)) return def;
  auto parts = split_args(str(key));
  if (parts.size() == 1) return parse_double(key, parts[0]);
  if (parts.size() == 2) return {parse_double(key, parts[0]), parse_double(key, parts[1])};
  throw ConfigError(field(key) + ": expected 're' or 're, im'");
}

std::vector<double> Config::sweep(const std::string& key, int n_default) const {
  const std::string s = str(key);
  std::vector<double> out;
  const bool is_log = boost::algorithm::starts_with(s, "log("), is_lin = boost::algorithm::starts_with(s, "lin(");
  if (is_log || is_lin) {
    if (s.back() != ')') throw ConfigError(field(key) + ": unterminated range '" + s + "'");
    auto args = split_args(s.substr(4, s.size() - 5));
    if (args.size() < 2 || args.size() > 3) throw ConfigError(field(key) + ": expected log(a,b[,n]) or lin(a,b[,n])");
    const double a = parse_double(key, args[0]), b = parse_double(key, args[1]);
    const int n = args.size() == 3 ? int(parse_double(key, args[2])) : n_default;
    if (n <= 0) throw ConfigError(field(key) + ": empty sweep");
    if (is_log && !(a > 0 && b > 0)) throw ConfigError(field(key) + ": log range needs positive bounds");
    for (int i = 0; i < n; ++i) {
      const double x = n == 1 ? 0.0 : double(i) / (n - 1);
      out.push_back(is_log ? std::exp(std::log(a) + x * (std::log(b) - std::log(a))) : a + x * (b - a));
    }
    return out;
  }
  if (s.empty()) throw ConfigError(field(key) + ": empty sweep");
  for (const auto& p : split_args(s)) {
    if (p.empty()) throw ConfigError(field(key) + ": empty entry in list");
    out.push_back(parse_double(key, p));
  }
  return out;
}

int RunOptions::worker_count() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

SystemParams system_from(const Config& c) {
  SystemParams p;
  p.delta1 = p.delta2 = c.num("system.delta", 0);
  p.delta1 = c.num("system.delta1", p.delta1);
  p.delta2 = c.num("system.delta2", p.delta2);
  p.u1 = p.u2 = c.num("system.u", 0);
  p.u1 = c.num("system.u1", p.u1);
  p.u2 = c.num("system.u2", p.u2);
  p.j_hop = c.num("system.j", 0);
  p.f1 = c.complex("system.f1");
  p.f2 = c.complex("system.f2");
  p.kappa1 = c.num("system.kappa1", 1);
  p.kappa2 = c.num("system.kappa2", 1);
  return p;
}

BathParams bath_from(const Config& c) {
  BathParams b;
  b.n_th = c.num("bath.n_th", 0);
  b.dephasing_rate = c.num("bath.dephasing", 0);
  b.cascade_efficiency = c.num("bath.cascade_efficiency", 0);
  if (c.has("bath.squeeze_r")) b.squeeze = std::polar(c.num("bath.squeeze_r"), c.num("bath.squeeze_theta", 0));
  b.squeeze_port = c.integer("bath.squeeze_port", 1);
  const std::string m = c.str("bath.squeeze_model", "verbatim");
  if (m == "verbatim")
    b.squeeze_model = SqueezeModel::verbatim;
  else if (m == "standard")
    b.squeeze_model = SqueezeModel::standard;
  else
    throw ConfigError("[bath] squeeze_model = '" + m + "': expected verbatim or standard");
  return b;
}

Settings settings_from(const Config& c, const RunOptions& opt) {
  Settings s;
  s.cutoff = opt.cutoff ? *opt.cutoff : c.integer("experiment.cutoff", 6);
  s.cutoff_limit = c.integer("experiment.cutoff_limit", 24);
  const std::string res = opt.resolution ? *opt.resolution : c.str("experiment.resolution", "low");
  if (res != "low" && res != "paper") throw ConfigError("[experiment] resolution = '" + res + "': expected low or paper");
  s.paper = res == "paper";
  s.workers = opt.worker_count();
  return s;
}

ValidationReport validate(const Config& c, const RunOptions& opt) {
  ValidationReport r;
  auto guard = [&](auto&& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      r.errors.push_back(e.what());
    } catch (const std::invalid_argument& e) {
      r.errors.push_back(e.what());
    }
  };
  const Experiment* ex = nullptr;
  guard([&] {
    ex = find_experiment(c.name());
    if (!ex) throw ConfigError("[experiment] name = '" + c.name() + "': unknown experiment");
  });
  Settings s;
  guard([&] {
    s = settings_from(c, opt);
    if (s.cutoff < 1) throw ConfigError("[experiment] cutoff: must be at least 1");
    if (s.cutoff_limit < 1) throw ConfigError("[experiment] cutoff_limit: must be at least 1");
    if (s.cutoff > s.cutoff_limit)
      throw ConfigError("[experiment] cutoff = " + std::to_string(s.cutoff) + " exceeds the limit " +
                        std::to_string(s.cutoff_limit));
  });
  SystemParams p;
  guard([&] {
    p = system_from(c);
    if (!(p.kappa1 > 0)) throw ConfigError("[system] kappa1: must be > 0");
    if (!(p.kappa2 > 0)) throw ConfigError("[system] kappa2: must be > 0");
    if (p.u1 < 0 || p.u2 < 0) throw ConfigError("[system] u: must be non-negative");
  });
  guard([&] {
    const BathParams b = bath_from(c);
    if (b.cascade_efficiency < 0 || b.cascade_efficiency > 1)
      throw ConfigError("[bath] cascade_efficiency: must lie in [0, 1]");
    if (b.n_th < 0) throw ConfigError("[bath] n_th: must be non-negative");
    if (b.dephasing_rate < 0) throw ConfigError("[bath] dephasing: must be non-negative");
    b.validate();
    if (b.cascade_efficiency > 0 && p.kappa1 > 0 && p.kappa2 > 0) {
      std::ostringstream os;
      os << "chi = sqrt(eta kappa1 kappa2) = " << cascade_chi(p, b);
      r.notes.push_back(os.str());
    }
  });
  for (const auto& [key, val] : c.entries())
    if (boost::algorithm::starts_with(key, "sweep.")) guard([&, k = key] { c.sweep(k, s.map_points()); });
  if (ex) {
    for (const auto& key : ex->required)
      if (!c.has(key)) r.errors.push_back(field(key) + ": required by " + ex->name);
    if (ex->check && r.errors.empty()) guard([&] { ex->check(c, s, r.errors); });
  }
  return r;
}

}  // namespace upb::app
