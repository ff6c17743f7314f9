#include <iostream>
#include <string>
#include <vector>

#include "heavytail_cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return heavytail::cli::run_cli(args, std::cout, std::cerr);
}
