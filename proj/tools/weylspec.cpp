#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "weylspec/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for essential spectra of warped-product ends"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  bool plots = false;
  int threads = 0;

  const char* commands[][2] = {
      {"hypotheses", "check the warping-function hypotheses on a sample grid"},
      {"weyl", "residual sweep of Weyl test functions above the bottom"},
      {"weyl-zero", "residual sweep of the zero-curvature construction"},
      {"eigen", "truncated eigenvalue computation and bottom trend"},
      {"appendix", "curvature, hypotheses, residuals and eigenvalues of the appendix surface"},
      {"horoball", "horoball inclusion inequality on a grid"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--plots", plots, "also write SVG plots");
    sub->add_option("--threads", threads, "worker threads (default: WEYLSPEC_THREADS or 1)")
        ->check(CLI::Range(1, 1024));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    weylspec::cli::RunConfig cfg = weylspec::cli::load_config(app.get_subcommands().front()->get_name(), config_path);
    cfg.out_dir = out_dir;
    cfg.plots = plots;
    cfg.threads = threads > 0 ? threads : weylspec::cli::threads_from_environment();
    return weylspec::cli::run(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
