#include <iostream>
#include <string>
#include <vector>

#include "aigrav/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return aigrav::cli::run(args, std::cout, std::cerr);
}
