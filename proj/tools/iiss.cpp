#include <iostream>
#include <string>
#include <vector>

#include "iiss/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  const auto res = iiss::cli::run(args);
  (res.exit_code == iiss::cli::kExitFailure ? std::cerr : std::cout) << res.text;
  return res.exit_code;
}
