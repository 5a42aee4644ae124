#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "upb/app.hpp"

namespace upb::app {

void Table::add(std::vector<double> row, std::string reason) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match the header of " + name);
  rows.push_back(std::move(row));
  if (!reason.empty()) has_reason = true;
  reasons.push_back(std::move(reason));
}

void parallel_for(int n, int workers, const std::function<void(int)>& f) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int k = 0; k < workers; ++k)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          // keep the first error, rethrown after join
          if (!failed.exchange(true)) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace {

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string clean(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

}  // namespace

std::string csv_text(const Table& t, const std::string& experiment) {
  std::string out;
  out += "# experiment: " + experiment + "\n";
  out += "# table: " + t.name + "\n";
  out += "# units: energies and rates in kappa, times in 1/kappa\n";
  for (const auto& [k, v] : t.meta) out += "# " + k + ": " + clean(v) + "\n";
  for (size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  if (t.has_reason) out += ",reason";
  out += "\n";
  for (size_t r = 0; r < t.rows.size(); ++r) {
    for (size_t i = 0; i < t.rows[r].size(); ++i) out += (i ? "," : "") + fmt_num(t.rows[r][i]);
    if (t.has_reason) out += "," + clean(t.reasons[r]);
    out += "\n";
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

RunOutcome run(const Config& c, const RunOptions& opt, std::ostream& log) {
  RunOutcome out;
  const auto report = validate(c, opt);
  if (!report.ok()) {
    for (const auto& e : report.errors) log << "error: " << e << "\n";
    out.exit_code = 1;
    return out;
  }
  const Settings s = settings_from(c, opt);
  const Experiment& ex = *find_experiment(c.name());
  const auto t_start = std::chrono::steady_clock::now();
  ExperimentResult res;
  try {
    res = ex.run(c, s);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    out.exit_code = 1;
    return out;
  } catch (const SolverError& e) {
    log << "solver error: " << e.what() << "\n";
    out.exit_code = 2;
    return out;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    out.exit_code = 1;
    return out;
  } catch (const std::exception& e) {
    log << "solver error: " << e.what() << "\n";
    out.exit_code = 2;
    return out;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) {
    log << "error: cannot create " << opt.out_dir << ": " << ec.message() << "\n";
    out.exit_code = 1;
    return out;
  }

  nlohmann::ordered_json m;
  m["experiment"] = ex.name;
  m["config_origin"] = c.origin();
  m["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.entries()) m["config"][k] = v;
  m["derived"] = report.notes;
  m["settings"] = {{"cutoff", s.cutoff},
                   {"cutoff_limit", s.cutoff_limit},
                   {"resolution", s.paper ? "paper" : "low"},
                   {"reduced_resolution", !s.paper},
                   {"workers", s.workers}};
  const OdeOptions ode{}, reg = regression_options();
  m["solver_tolerances"] = {
      {"ode", {{"method", "dopri5"}, {"rtol", ode.rtol}, {"atol", ode.atol}}},
      {"regression", {{"rtol", reg.rtol}, {"atol", reg.atol}}},
      {"steady_state",
       {{"method", steady_state_backend()},
        {"hermiticity", DensityMatrix::kHermTol},
        {"trace", DensityMatrix::kTraceTol},
        {"min_eigenvalue", -DensityMatrix::kEigTol}}}};
  const auto& ct = res.certificate;
  m["convergence"] = {{"applicable", ct.applicable},
                      {"observable", ct.observable},
                      {"cutoff", ct.cutoff},
                      {"basis_size", ct.basis_size},
                      {"top_manifold_population", ct.top_population},
                      {"value", ct.value},
                      {"value_cutoff_plus_2", ct.value_next},
                      {"relative_delta", ct.delta_next},
                      {"converged", ct.converged}};
  m["summary"] = res.summary;
  m["warnings"] = res.warnings;
  m["wall_time_s"] = wall;
  m["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& t : res.tables) {
    const std::string text = csv_text(t, ex.name);
    const fs::path path = fs::path(opt.out_dir) / (t.name + ".csv");
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) {
      log << "error: cannot write " << path << "\n";
      out.exit_code = 2;
      return out;
    }
    m["artifacts"].push_back(
        {{"file", t.name + ".csv"}, {"sha256", sha256_hex(text)}, {"bytes", text.size()}, {"rows", t.rows.size()}});
  }
  std::ofstream mf(fs::path(opt.out_dir) / "manifest.json");
  mf << m.dump(2) << "\n";

  for (const auto& w : res.warnings) log << "warning: " << w << "\n";
  if (!ct.converged)
    log << "warning: not converged (" << ct.observable << " changes by " << ct.delta_next
        << " relative at cutoff + 2, top-manifold population " << ct.top_population << ")\n";
  log << ex.name << ": " << res.tables.size() << " tables in " << opt.out_dir << " (" << wall << " s)\n";
  out.manifest = std::move(m);
  return out;
}

}  // namespace upb::app
