#include <iostream>

#include "runsched/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return runsched::cli::run(args, std::cout, std::cerr);
}
