#include <iostream>
#include <string>
#include <vector>

#include "relureg/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return relureg::run_cli(args, std::cout, std::cerr);
}
