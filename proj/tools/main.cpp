#include <iostream>
#include <string>
#include <vector>

#include "histostack/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return histostack::run_cli(args, std::cout, std::cerr);
}
