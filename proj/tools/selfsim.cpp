#include <boost/program_options.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "selfsim/cli/run.hpp"

namespace po = boost::program_options;
using selfsim::cli::RunConfig;

namespace {

int usage_error(const std::string& msg, const std::string& ptr) {
  nlohmann::json e{{"error", {{"kind", "ValidationError"}, {"message", msg}, {"pointer", ptr}}}, {"exit_code", 2}};
  std::cerr << e.dump(2) << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  po::options_description opts("Options");
  opts.add_options()
      ("help,h", "show this help")
      ("version", "print the version")
      ("config", po::value<std::string>(), "JSON config file")
      ("output", po::value<std::string>(), "write the report here instead of stdout")
      ("format", po::value<std::string>(), "json or csv")
      ("precision", po::value<std::int64_t>(), "working precision in bits")
      ("max-precision", po::value<std::int64_t>(), "precision cap in bits")
      ("seed", po::value<std::uint64_t>(), "Monte Carlo seed")
      ("threads", po::value<unsigned>(), "sweep worker threads")
      ("memory-cap", po::value<std::uint64_t>(), "memory budget for half-sum tables and atom sets, in bytes");
  po::options_description hidden;
  hidden.add_options()("command", po::value<std::string>());
  po::options_description all;
  all.add(opts).add(hidden);
  po::positional_options_description pos;
  pos.add("command", 1);

  po::variables_map vm;
  try {
    po::store(po::command_line_parser(argc, argv).options(all).positional(pos).run(), vm);
    po::notify(vm);
  } catch (const po::error& e) {
    return usage_error(e.what(), "");
  }
  if (vm.count("help")) {
    std::cout << "usage: selfsim [COMMAND] --config PATH [options]\n\ncommands:";
    for (const auto& c : selfsim::cli::command_names()) std::cout << " " << c;
    std::cout << "\n\n" << opts << "\n";
    return 0;
  }
  if (vm.count("version")) {
    std::cout << selfsim::kVersion << "\n";
    return 0;
  }

  RunConfig cfg;
  try {
    if (vm.count("config")) cfg = selfsim::cli::load_config(vm["config"].as<std::string>());
  } catch (const selfsim::ValidationError& e) {
    return usage_error(e.what(), e.pointer());
  }
  if (vm.count("command")) {
    auto c = vm["command"].as<std::string>();
    if (!cfg.command.empty() && cfg.command != c) return usage_error("command differs from the config file", "/command");
    cfg.command = c;
  }
  if (cfg.command.empty()) return usage_error("no command given", "/command");
  if (vm.count("output")) cfg.output = vm["output"].as<std::string>();
  if (vm.count("format")) cfg.format = vm["format"].as<std::string>();
  if (vm.count("precision")) {
    cfg.precision = vm["precision"].as<std::int64_t>();
    if (!vm.count("max-precision")) cfg.max_precision = std::max(cfg.max_precision, cfg.precision);
  }
  if (vm.count("max-precision")) cfg.max_precision = vm["max-precision"].as<std::int64_t>();
  if (vm.count("seed")) cfg.seed = vm["seed"].as<std::uint64_t>();
  if (vm.count("threads")) cfg.threads = vm["threads"].as<unsigned>();
  if (vm.count("memory-cap")) cfg.memory_cap = vm["memory-cap"].as<std::uint64_t>();

  // Render fully before touching the output file so a failed run leaves no partial report.
  std::ostringstream buf;
  int code = selfsim::cli::run(cfg, buf, std::cerr);
  if (code != 0) return code;
  if (cfg.output.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f || !(f << buf.str())) return usage_error("cannot write '" + cfg.output + "'", "/output");
  }
  return 0;
}
