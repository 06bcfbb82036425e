#include <iostream>
#include <string>
#include <vector>

#include "homlab/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return homlab::cli::run(args, std::cout, std::cerr);
}
