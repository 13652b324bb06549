#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "logsymp/cli/run.hpp"
#include "logsymp/error.hpp"

using namespace logsymp;

int main(int argc, char** argv) {
  CLI::App app{"Computations with log-symplectic and b-Poisson structures"};
  app.set_version_flag("--version", "logsymp 0.1.0");

  std::string command, scenario_path, out_dir, manifold;
  std::optional<int> steps, grid;
  std::optional<double> tol;
  bool csv = false;
  int threads = 1;

  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(cli::command_names()));
  app.add_option("-s,--scenario", scenario_path, "JSON scenario file")->check(CLI::ExistingFile);
  app.add_option("-m,--manifold", manifold, "Catalog manifold (overrides the scenario)");
  app.add_option("-o,--out", out_dir, "Directory for the .txt/.json report and CSV files");
  app.add_flag("--csv", csv, "Also produce CSV output where the command has any");
  app.add_option("--steps", steps, "RK4 steps for flows")->check(CLI::PositiveNumber);
  app.add_option("--grid", grid, "Seed grid: N+1 points across the collar, N around each circle")
      ->check(CLI::Range(4, 4096));
  app.add_option("--tol", tol, "Override the command's primary tolerance")->check(CLI::PositiveNumber);
  app.add_option("-j,--threads", threads, "Worker threads for randomized trials")
      ->envname("LOGSYMP_THREADS")
      ->check(CLI::Range(1, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cli::Scenario s;
    if (!scenario_path.empty()) s = cli::load_scenario(scenario_path);
    if (!manifold.empty()) {
      s.manifold = manifold;
      s.manifold_given = true;
    }
    if (steps) s.steps = *steps;
    if (grid) s.grid = {*grid + 1, *grid};
    if (tol) s.tolerances[cli::primary_tolerance(command)] = *tol;
    if (csv) s.csv = true;
    if (out_dir.empty()) out_dir = s.out_dir;

    const auto start = std::chrono::steady_clock::now();
    const cli::Report report = cli::run(command, s, threads);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    std::cout << report.text();
    if (!out_dir.empty()) cli::write_report(report, out_dir);
    std::cerr << "runtime " << elapsed.count() << " s\n";
    return cli::exit_code(report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Parse || e.kind() == ErrorKind::Catalog ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
