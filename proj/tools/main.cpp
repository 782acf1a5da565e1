#include <iostream>
#include <string>
#include <vector>

#include "amcontrast/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return amc::cli::run(args, std::cout, std::cerr);
}
