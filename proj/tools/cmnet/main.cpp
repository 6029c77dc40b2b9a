#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cmnet::cli::run_cli(args, std::cout, std::cerr);
}
