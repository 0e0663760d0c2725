#pragma once

// Convergence-study driver: pick a coded problem and a discretisation,
// sweep a mesh-level range for each coefficient contrast mu, and emit the
// results as a fixed-width text table, CSV, and optional SVG figures.
// All artifacts are deterministic functions of the configuration.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wg/errors.hpp"
#include "wg/mesh.hpp"
#include "wg/numfmt.hpp"
#include "wg/problems.hpp"
#include "wg/svg.hpp"
#include "wg/system.hpp"

namespace wg {

struct StudyConfig {
  std::string problem = "example1";  // example1 | example2 | manufactured_jump
  int k = 1;
  Variant variant = Variant::Superconvergent;
  std::vector<double> mu_values{1.0};
  int level_begin = 0;
  int level_end = 2;
  double rho = 1.0;
  SolverMethod solver = SolverMethod::SparseDirect;
  double tol = 1e-12;
  int max_iterations = 0;  // 0: solver picks
  NeumannConvention neumann = NeumannConvention::Single;
  std::string out_dir = ".";
  bool emit_table = true;
  bool emit_csv = true;
  bool emit_svg = false;
  bool emit_mesh = false;

  ProblemSpec make_problem(double mu) const {
    if (problem == "example1") return example1(mu);
    if (problem == "example2") return example2(mu);
    if (problem == "manufactured_jump") return manufactured_jump(mu);
    throw ConfigError("study: unknown problem '" + problem + "'");
  }

  DiscretizationConfig discretization() const {
    return variant == Variant::Standard ? DiscretizationConfig::standard(k, rho)
                                        : DiscretizationConfig::superconvergent(k, rho);
  }

  void validate() const {
    make_problem(1.0);
    discretization();
    if (mu_values.empty()) throw ConfigError("study: need at least one mu");
    for (double mu : mu_values)
      if (!(mu > 0.0)) throw ConfigError("study: mu must be positive");
    if (level_begin < 0) throw ConfigError("study: negative level");
    if (level_end < level_begin) throw ConfigError("study: empty level range");
    if (!(tol > 0.0)) throw ConfigError("study: tolerance must be positive");
    if (max_iterations < 0) throw ConfigError("study: negative iteration cap");
    if (!(emit_table || emit_csv || emit_svg || emit_mesh))
      throw ConfigError("study: nothing to emit");
  }

  std::string variant_tag() const {
    return variant == Variant::Standard ? "std" : "super";
  }

  /// Filesystem-safe stem for one mu's artifacts.
  std::string case_stem(double mu) const {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", mu);
    return problem + "_" + variant_tag() + "_k" + std::to_string(k) + "_mu" + buf;
  }

  std::string caption(double mu) const {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", mu);
    std::string s = problem + " " + variant_tag() + " k=" + std::to_string(k) +
                    " mu=" + buf;
    if (variant == Variant::Standard) {
      std::snprintf(buf, sizeof(buf), "%g", rho);
      s += " rho=" + std::string(buf);
    }
    if (neumann == NeumannConvention::Literal) s += " neumann=literal";
    return s;
  }
};

/// Fixed-width rendering in the traditional table layout: one row per
/// level, error and rate column pairs.  Undefined rates print as 0.0.
inline std::string emit_table(const ConvergenceTable& table,
                              const std::string& caption = "") {
  if (table.rows.empty()) throw ConfigError("table: no rows");
  std::ostringstream out;
  if (!caption.empty()) out << "# " << caption << '\n';
  char line[160];
  std::snprintf(line, sizeof(line), "%5s  %10s  %5s  %10s  %5s\n", "level",
                "errL2a", "rate", "errGrada2", "rate");
  out << line;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const ErrorReport& r = table.rows[i];
    auto rate = [](double v) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.1f", std::isnan(v) ? 0.0 : v);
      return std::string(buf);
    };
    std::snprintf(line, sizeof(line), "%5d  %10s  %5s  %10s  %5s\n", r.level,
                  fortran_sci(r.err_l2a).c_str(), rate(table.rates[i].l2).c_str(),
                  fortran_sci(r.err_grad_a2).c_str(),
                  rate(table.rates[i].grad).c_str());
    out << line;
  }
  return out.str();
}

struct StudyResult {
  std::vector<double> mu;                 // one entry per completed case
  std::vector<ConvergenceTable> tables;   // parallel to mu
  std::vector<std::string> files;         // paths written, in write order
};

namespace studydetail {

inline ConvergenceTable with_rates(std::vector<ErrorReport> rows) {
  if (rows.size() >= 2) return convergence_rates(rows);
  ConvergenceTable t;
  t.rates.resize(rows.size());
  t.rows = std::move(rows);
  return t;
}

inline void write_file(StudyResult& res, const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("study: cannot write '" + path.string() + "'");
  os << body;
  res.files.push_back(path.string());
}

inline void write_case(StudyResult& res, const StudyConfig& cfg, double mu,
                       ConvergenceTable table,
                       const std::filesystem::path& dir) {
  std::string stem = cfg.case_stem(mu);
  if (cfg.emit_table)
    write_file(res, dir / (stem + ".txt"), emit_table(table, cfg.caption(mu)));
  if (cfg.emit_csv) write_file(res, dir / (stem + ".csv"), to_csv(table));
  res.mu.push_back(mu);
  res.tables.push_back(std::move(table));
}

}  // namespace studydetail

/// Runs every (mu, level) case and writes the requested artifacts.
/// Artifacts are flushed per mu, so results computed before a failure
/// survive it.  Throws ConfigError / MeshError / SolverError through.
inline StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("study: cannot create '" + dir.string() + "'");

  StudyResult res;
  std::vector<Mesh> meshes;
  for (int level = cfg.level_begin; level <= cfg.level_end; ++level)
    meshes.push_back(
        generate_interface_mesh(cfg.make_problem(cfg.mu_values.front()).domain, level));

  // geometry artifacts are shared by every mu
  for (const Mesh& mesh : meshes) {
    std::string stem = cfg.problem + "_L" + std::to_string(mesh.level);
    if (cfg.emit_svg)
      studydetail::write_file(res, dir / (stem + "_mesh.svg"), render_mesh_svg(mesh));
    if (cfg.emit_mesh) {
      std::ostringstream os;
      write_mesh(mesh, os);
      studydetail::write_file(res, dir / (stem + ".mesh"), os.str());
    }
  }

  DiscretizationConfig dcfg = cfg.discretization();
  for (double mu : cfg.mu_values) {
    ProblemSpec prob = cfg.make_problem(mu);
    std::vector<ErrorReport> rows;
    std::vector<double> heat;
    try {
      for (const Mesh& mesh : meshes) {
        LinearSystem sys = assemble(mesh, prob, dcfg, cfg.neumann);
        WgSolution sol = solve(sys, cfg.solver, cfg.tol, cfg.max_iterations);
        bool finest = mesh.level == cfg.level_end;
        rows.push_back(compute_errors(mesh, prob, dcfg, sol.coeffs, mesh.level,
                                      finest && cfg.emit_svg ? &heat : nullptr));
      }
    } catch (...) {
      if (!rows.empty())
        studydetail::write_case(res, cfg, mu, studydetail::with_rates(std::move(rows)),
                                dir);
      throw;
    }
    studydetail::write_case(res, cfg, mu, studydetail::with_rates(std::move(rows)), dir);
    if (cfg.emit_svg)
      studydetail::write_file(
          res, dir / (cfg.case_stem(mu) + "_err.svg"),
          render_element_field_svg(meshes.back(), heat, cfg.caption(mu)));
  }
  return res;
}

}  // namespace wg
