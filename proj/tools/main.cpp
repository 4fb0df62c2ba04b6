#include <iostream>
#include <string>
#include <vector>

#include "jamflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return jamflow::run_cli(args, std::cout, std::cerr);
}
