#include <iostream>

#include "CLI11.hpp"
#include "hq/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Continuity-method solver and estimate monitor for the sigma_2 / sigma_1 Hessian quotient equation"};
  hq::cli::Options options;
  std::string output;
  bool no_timestamp = false;
  app.add_option("--config", options.config_path, "sectioned key/value run configuration")->required();
  app.add_option("--output", output, "output directory (overrides run.output_dir)");
  app.add_flag("--no-timestamp", no_timestamp, "omit the '# generated' line from CSV outputs");
  app.add_option("--threads", options.threads, "worker threads for node loops")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : hq::cli::config_error;
  }
  if (!output.empty()) options.output_dir = output;
  options.timestamp = !no_timestamp;
  return hq::cli::run(options, std::cout, std::cerr);
}
