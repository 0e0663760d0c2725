// Command-line convergence studies over the coded interface problems.
// Exit codes: 0 ok, 2 bad configuration, 3 solver failure, 4 mesh or
// geometry failure.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wg/study.hpp"

namespace {

int parse_int(const std::string& tok, const wg::ConfigError& bad) {
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') throw bad;
  return static_cast<int>(v);
}

int run(int argc, char** argv) {
  CLI::App app{"weak Galerkin convergence studies on interface-fitted meshes"};
  app.set_config("--config", "", "key = value file; command-line flags win");

  wg::StudyConfig cfg;
  std::string variant = "super";
  std::string solver = "sparse";
  std::string neumann = "single";
  std::string levels = "0..2";
  std::string emit = "table,csv";

  app.add_option("--problem", cfg.problem, "example1 | example2 | manufactured_jump")
      ->capture_default_str();
  app.add_option("--k", cfg.k, "interior polynomial degree")->capture_default_str();
  app.add_option("--variant", variant, "standard | super")->capture_default_str();
  app.add_option("--mu", cfg.mu_values, "coefficient contrast, repeatable");
  app.add_option("--levels", levels, "refinement range A..B")->capture_default_str();
  app.add_option("--rho", cfg.rho, "penalty weight (standard variant)")
      ->capture_default_str();
  app.add_option("--solver", solver, "cg | dense | sparse")->capture_default_str();
  app.add_option("--tol", cfg.tol, "iterative solver tolerance")->capture_default_str();
  app.add_option("--max-iter", cfg.max_iterations, "iteration cap, 0 = automatic")
      ->capture_default_str();
  app.add_option("--neumann", neumann, "single | literal interface flux moments")
      ->capture_default_str();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--emit", emit, "comma list from table,csv,svg,mesh")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (variant == "standard")
    cfg.variant = wg::Variant::Standard;
  else if (variant == "super")
    cfg.variant = wg::Variant::Superconvergent;
  else
    throw wg::ConfigError("variant: expected standard or super, got '" + variant + "'");

  if (solver == "cg")
    cfg.solver = wg::SolverMethod::CgJacobi;
  else if (solver == "dense")
    cfg.solver = wg::SolverMethod::DenseCholesky;
  else if (solver == "sparse")
    cfg.solver = wg::SolverMethod::SparseDirect;
  else
    throw wg::ConfigError("solver: expected cg, dense or sparse, got '" + solver + "'");

  if (neumann == "single")
    cfg.neumann = wg::NeumannConvention::Single;
  else if (neumann == "literal")
    cfg.neumann = wg::NeumannConvention::Literal;
  else
    throw wg::ConfigError("neumann: expected single or literal, got '" + neumann + "'");

  wg::ConfigError bad_levels("levels: expected A..B, got '" + levels + "'");
  std::size_t pos = levels.find("..");
  std::string lo = pos == std::string::npos ? levels : levels.substr(0, pos);
  std::string hi = pos == std::string::npos ? levels : levels.substr(pos + 2);
  cfg.level_begin = parse_int(lo, bad_levels);
  cfg.level_end = parse_int(hi, bad_levels);

  cfg.emit_table = cfg.emit_csv = cfg.emit_svg = cfg.emit_mesh = false;
  std::string token;
  std::istringstream toks(emit);
  while (std::getline(toks, token, ',')) {
    if (token == "table")
      cfg.emit_table = true;
    else if (token == "csv")
      cfg.emit_csv = true;
    else if (token == "svg")
      cfg.emit_svg = true;
    else if (token == "mesh")
      cfg.emit_mesh = true;
    else
      throw wg::ConfigError("emit: unknown artifact '" + token + "'");
  }

  wg::StudyResult res = wg::run_study(cfg);
  for (std::size_t i = 0; i < res.tables.size(); ++i)
    std::printf("%s\n", wg::emit_table(res.tables[i], cfg.caption(res.mu[i])).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const wg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const wg::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const wg::Error& e) {
    std::fprintf(stderr, "mesh error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
