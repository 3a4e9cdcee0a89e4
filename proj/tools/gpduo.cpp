#include <iostream>

#include <CLI11.hpp>

#include "gpduo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ground states of two-component attractive condensates"};
  app.require_subcommand(1);

  gpduo::Invocation inv;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;

  const std::pair<const char*, const char*> commands[] = {
      {"townes", "Solve the radial ground-state profile and certify its constants"},
      {"solve", "Minimize one parameter point"},
      {"sweep", "Run a concentration ladder and fit the scaling laws"},
      {"phase", "Classify a grid of (a, beta) points"},
      {"report", "Summarize sweep CSV files"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (std::string(name) == "report") {
      sub->add_option("csv", inv.inputs, "Sweep CSV files")->required();
    } else {
      sub->add_option("config_file", inv.inputs, "Configuration file");
      sub->add_option("--config", inv.config_path, "Configuration file");
      sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
      sub->add_option("--seed", seed, "Seed for randomized starts");
      sub->add_option("--tol", tol,
                      "Bisection tolerance (townes) or KKT tolerance (other commands)")
          ->check(CLI::PositiveNumber);
    }
    sub->add_option("--out", out_dir, "Output directory");
    sub->callback([&inv, name = std::string(name)] { inv.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gpduo::exit_config;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--out")) inv.out_dir = out_dir;
    if (sub->get_option_no_throw("--threads") && sub->count("--threads")) inv.threads = threads;
    if (sub->get_option_no_throw("--seed") && sub->count("--seed")) inv.seed = seed;
    if (sub->get_option_no_throw("--tol") && sub->count("--tol")) inv.tol = tol;
  }
  return gpduo::run(inv, std::cout, std::cerr);
}
