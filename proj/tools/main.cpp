#include <iostream>
#include <string>
#include <vector>

#include "hybridsw/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return hybridsw::cli::run(args, std::cout, std::cerr);
}
