// rbmcert: command line front end.
//
//   rbmcert <command> --input problem.json [--out dir] [--seed n]
//           [--set key=value ...] [--json-only]
//
// The report JSON goes to stdout (and to <out>/report.json). The human
// summary goes to stderr unless --json-only is given.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rbmcert/commands.hpp"

namespace fs = std::filesystem;
using rbmcert::io::Json;

namespace {

struct Flags {
  std::string input;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  bool json_only = false;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Json load_problem(const std::string& command, const Flags& f) {
  Json doc;
  if (ends_with(f.input, ".csv")) {
    if (command != "classify") throw rbmcert::InputError("CSV input is accepted by classify only");
    doc["matrix"] = rbmcert::io::to_json(rbmcert::io::read_csv_matrix(f.input));
  } else {
    doc = rbmcert::io::load_json_file(f.input);
  }
  if (!doc.is_object()) throw rbmcert::InputError(f.input + ": top level must be an object");
  for (const auto& s : f.sets) rbmcert::io::apply_override(doc, s);
  if (f.seed) doc["simulation"]["seed"] = *f.seed;
  return doc;
}

int run(const std::string& command, const Flags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Json report;
  report["command"] = command;
  report["meta"]["started_utc"] = utc_now();
  int code = 0;
  rbmcert::CommandResult res;
  try {
    const Json problem = load_problem(command, f);
    report["input"] = problem;
    res = rbmcert::run_command(command, problem);
    report["result"] = res.result;
    code = static_cast<int>(res.code);
  } catch (const rbmcert::Error& e) {
    code = static_cast<int>(e.code());
    report["error"] = e.what();
  } catch (const std::exception& e) {
    code = static_cast<int>(rbmcert::ExitCode::kNumerical);
    report["error"] = std::string("internal: ") + e.what();
  }
  report["exit_code"] = code;
  report["meta"]["finished_utc"] = utc_now();
  report["meta"]["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string text = report.dump(2);
  std::cout << text << '\n';
  if (!f.json_only) {
    std::cerr << command << '\n';
    for (const auto& line : res.summary) std::cerr << line << '\n';
    if (report.contains("error")) std::cerr << "error: " << report["error"].get<std::string>() << '\n';
    std::cerr << "exit code " << code << '\n';
  }
  if (!f.out.empty()) {
    try {
      fs::create_directories(f.out);
      std::ofstream(fs::path(f.out) / "report.json") << text << '\n';
      if (report.contains("input")) std::ofstream(fs::path(f.out) / "config.json") << report["input"].dump(2) << '\n';
      for (const auto& t : res.tables)
        rbmcert::io::write_csv((fs::path(f.out) / (t.name + ".csv")).string(), t.header, t.rows);
    } catch (const std::exception& e) {
      std::cerr << "error writing outputs: " << e.what() << '\n';
      if (code == 0) code = static_cast<int>(rbmcert::ExitCode::kInput);
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability certificates and tail checks for reflected Brownian motion"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::string> help{
      {"classify", "matrix classes of 'matrix' (JSON or CSV)"},
      {"existence", "weak existence on maximal face sets"},
      {"certify", "check the three conditions and build the certificate"},
      {"lambda", "Lambda, K and rho_max for a given Q"},
      {"simulate", "stationary samples, invariants and tail fit"},
      {"particles", "stability, rho0 and certificate of a particle system"},
      {"tailcheck", "certify, simulate, fit and compare the tail rate"}};
  for (const auto& name : rbmcert::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--input", flags.input, "problem file (JSON; CSV for classify)")->required();
    sub->add_option("--out", flags.out, "directory for report.json, config.json and CSV output");
    sub->add_option("--seed", flags.seed, "overrides simulation.seed");
    sub->add_option("--set", flags.sets, "key=value override, dotted keys, repeatable");
    sub->add_flag("--json-only", flags.json_only, "suppress the human summary");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(rbmcert::ExitCode::kInput);
  }
  for (const auto& name : rbmcert::command_names())
    if (app.got_subcommand(name)) return run(name, flags);
  return static_cast<int>(rbmcert::ExitCode::kInput);
}
