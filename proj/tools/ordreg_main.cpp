#include <iostream>
#include <string>
#include <vector>

#include "ordreg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ordreg::cli::run(std::move(args), std::cout, std::cerr);
}
