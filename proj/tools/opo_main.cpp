#include <iostream>

#include "opo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return opo::cli::run_command(args, std::cout, std::cerr);
}
