// dfs-lab: run scenario files and the built-in selftest.
//
//   dfs-lab run <scenario.json> [--format json|csv|markdown] [--out PATH]
//                               [--seed N] [--tol-scale X]
//   dfs-lab selftest [--format ...] [--out PATH] [--seed N]
//
// Exit codes: 0 ok, 1 invalid config, 2 check failure, 3 internal fault / I/O.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dfslab/cli.hpp"

namespace {

using namespace dfslab;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string render(const Report& r, const std::string& format) {
  if (format == "csv") return emit_csv(r);
  if (format == "markdown") return emit_markdown(r);
  return emit_json(r);
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    if (std::ferror(stdout)) throw IoError("failed to write to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed to write '" + path + "'");
}

json read_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw cli::ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
}

int cmd_run(const std::string& path, const std::string& format, const std::string& out,
            const std::optional<std::uint64_t>& seed, double tol_scale) {
  cli::Scenario s;
  {
    json j = read_scenario_file(path);
    if (seed && j.is_object()) j["seed"] = *seed;
    s = cli::parse_scenario(j);
  }
  const Report r = cli::run_scenario(s, tol_scale);
  write_output(render(r, format), out);
  for (const auto& c : r.checks)
    if (!c.pass) std::fprintf(stderr, "check failed: %s\n", c.name.c_str());
  return r.pass() ? cli::kOk : cli::kCheckFailure;
}

int cmd_selftest(const std::string& format, const std::string& out, std::uint64_t seed) {
  const auto st = cli::run_selftest(seed);
  for (const auto& c : st.criteria) std::fprintf(stderr, "%s\n", acceptance::summary_line(c).c_str());
  write_output(render(st.report, format), out);
  return st.report.pass() ? cli::kOk : cli::kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dfs-lab: decoherence-free subspaces, Connes distances and T-duality checks"};
  app.require_subcommand(1);

  std::string scenario_path, format = "json", out_path;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;

  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv", "markdown"}));
  run->add_option("--out", out_path, "write output to PATH instead of stdout");
  auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--tol-scale", tol_scale, "multiply upper-bound tolerances")->check(CLI::PositiveNumber);

  std::uint64_t self_seed = acceptance::kDefaultSeed;
  auto* self = app.add_subcommand("selftest", "run the acceptance criteria");
  self->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv", "markdown"}));
  self->add_option("--out", out_path, "write output to PATH instead of stdout");
  self->add_option("--seed", self_seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kInvalidConfig;
  }

  try {
    if (*run) {
      std::optional<std::uint64_t> override_seed;
      if (*seed_opt) override_seed = seed;
      return cmd_run(scenario_path, format, out_path, override_seed, tol_scale);
    }
    return cmd_selftest(format, out_path, self_seed);
  } catch (const IoError& e) {
    std::fprintf(stderr, "dfs-lab: %s\n", e.what());
    return cli::kInternal;
  } catch (const dfslab::Error& e) {
    // config errors and module-level validation failures
    std::fprintf(stderr, "dfs-lab: invalid configuration: %s\n", e.what());
    return cli::kInvalidConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dfs-lab: internal error: %s\n", e.what());
    return cli::kInternal;
  }
}
