// Command line front end. Talks to the solver only through the C interface.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "fountain/fountain.h"

namespace {

constexpr int exit_runtime = 5;

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool mirror = false;
  bool inject_sign_error = false;
};

void print_line(const char *line, void *) { std::printf("%s\n", line); }

int report(int status, const char *what) {
  std::fprintf(stderr, "%s: %s (%s)\n", what, fountain_last_error(), fountain_status_name(status));
  const bool validation = status == FOUNTAIN_E_CONFIG || status == FOUNTAIN_E_ASSUMPTION ||
                          status == FOUNTAIN_E_INVALID_ARGUMENT;
  return validation ? FOUNTAIN_EXIT_VALIDATION : exit_runtime;
}

int run(const std::string &command, const Options &opt, const CLI::App &sub) {
  fountain_config *cfg = nullptr;
  int st = fountain_config_load(opt.config.c_str(), &cfg);
  if (st != FOUNTAIN_OK)
    return report(st, "cannot load configuration");
  // Command line flags override the file.
  if (sub.count("--seed"))
    st = fountain_config_set_seed(cfg, opt.seed);
  if (st == FOUNTAIN_OK && sub.count("--out"))
    st = fountain_config_set_output(cfg, opt.out.c_str());
  if (st == FOUNTAIN_OK && sub.count("--jobs"))
    st = fountain_config_set_jobs(cfg, opt.jobs);
  if (st == FOUNTAIN_OK && opt.mirror)
    st = fountain_config_set_mirror(cfg, 1);
  if (st == FOUNTAIN_OK && opt.inject_sign_error)
    st = fountain_config_set_sign_error(cfg, 1);
  int code = exit_runtime;
  if (st == FOUNTAIN_OK)
    st = fountain_run(command.c_str(), cfg, print_line, nullptr, &code);
  fountain_config_free(cfg);
  if (st != FOUNTAIN_OK)
    return report(st, command.c_str());
  return code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Fountain-theorem solver for strongly indefinite variational problems"};
  app.set_version_flag("--version", fountain_version());
  app.require_subcommand(1);

  Options opt;
  const struct {
    const char *name;
    const char *help;
  } commands[] = {
      {"spectrum", "write eigenvalue, direction and embedding-constant tables"},
      {"geometry", "evaluate the fountain geometry for every k"},
      {"solve", "compute minimax critical points for every k"},
      {"check", "run the oracle and property groups"},
  };
  for (const auto &c : commands) {
    CLI::App *sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config, "run configuration (INI)")->required();
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--mirror", opt.mirror, "negate every mesh direction");
    sub->add_flag("--inject-sign-error", opt.inject_sign_error,
                  "corrupt the projector (negative control)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : FOUNTAIN_EXIT_VALIDATION;
  }
  for (const CLI::App *sub : app.get_subcommands())
    return run(sub->get_name(), opt, *sub);
  return FOUNTAIN_EXIT_VALIDATION;
}
