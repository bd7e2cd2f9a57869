#include <iostream>

#include "chlat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return chlat::run_cli(args, std::cout, std::cerr);
}
