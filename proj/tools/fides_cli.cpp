#include <iostream>
#include <string>
#include <vector>

#include "fides/cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return fides::cli::cli_main(args, std::cout, std::cerr);
}
