#include <iostream>
#include <string>
#include <vector>

#include "cve/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cve::run_cli(args, std::cout, std::cerr);
}
