#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chlat/renderer.hpp"
#include "chlat/simulator.hpp"

namespace chlat {

struct RunConfig {
  bool has_l = false;
  bool has_k = false;
  LatticeSpec lattice;
  DualLattice dual;
  std::vector<WaveIndex> shell;  // optional prescribed representatives

  double lambda = 0.0;
  bool lambda_auto = false;
  double lambda_factor = 1.0;
  double gamma2 = 0.0;
  double gamma3 = 1.0;
  double sigma = 0.0;
  bool even = false;

  SimConfig sim;
  std::string init_label;  // equilibrium label for init = equilibrium
  std::string init_file;
  bool run_reduced = false;
  std::vector<double> compare_factors;

  std::string render_source = "equilibrium";  // equilibrium | coordinates | field
  std::string render_label;
  std::vector<double> render_coordinates;
  std::vector<double> render_phases;
  std::string render_field;
  RasterSpec raster;

  std::string out_dir;
  std::vector<std::string> formats;
  std::string name;  // stem for output files
};

// Strict parsers: unknown sections or keys, duplicates and malformed values
// throw ConfigError. Numbers accept + - * / ( ), pi and sqrt().
RunConfig parse_ini(const std::string& text);
RunConfig parse_json_config(const std::string& text);
// Picks the format from the extension (.json) or the first character.
// Relative file references resolve against the config's directory.
RunConfig load_config(const std::string& path);
RunConfig figure_config(const std::string& figure_id);

double evaluate_expression(const std::string& text);

int exit_code(ErrorCode code);

// Entry point behind the ch_lattice executable; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chlat
